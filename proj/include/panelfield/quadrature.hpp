#pragma once

// Globally adaptive tensor-product Gauss-Kronrod (7/15) cubature over
// axis-aligned rectangles, for vector-valued integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

namespace panelfield::quad {

struct Rect {
  double x_lo, x_hi, z_lo, z_hi;
  double area() const noexcept { return (x_hi - x_lo) * (z_hi - z_lo); }
};

namespace detail {

// Kronrod 15-point abscissae (positive half, descending) with Kronrod and
// embedded Gauss 7-point weights (Gauss weight 0 for Kronrod-only nodes).
inline constexpr std::array<double, 8> kNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 8> kGauss{
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327};

struct Rule1D {
  std::array<double, 15> x;
  std::array<double, 15> wk;
  std::array<double, 15> wg;
};

inline Rule1D make_rule(double lo, double hi) {
  Rule1D r;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < 7; ++i) {
    r.x[i] = mid - half * kNodes[i];
    r.x[14 - i] = mid + half * kNodes[i];
    r.wk[i] = r.wk[14 - i] = half * kKronrod[i];
    r.wg[i] = r.wg[14 - i] = half * kGauss[i];
  }
  r.x[7] = mid;
  r.wk[7] = half * kKronrod[7];
  r.wg[7] = half * kGauss[7];
  return r;
}

}  // namespace detail

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct CellEstimate {
  Rect rect;
  Vec<N> value{};
  double error = 0.0;
  bool operator<(const CellEstimate& o) const { return error < o.error; }
};

/// Applies the 15x15 Kronrod product rule and the embedded 7x7 Gauss rule;
/// the error is the largest component difference between them.
template <std::size_t N, class F>
CellEstimate<N> integrate_cell(const F& f, const Rect& rect) {
  const auto rx = detail::make_rule(rect.x_lo, rect.x_hi);
  const auto rz = detail::make_rule(rect.z_lo, rect.z_hi);
  Vec<N> k{}, g{};
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      const Vec<N> v = f(rx.x[i], rz.x[j]);
      const double wk = rx.wk[i] * rz.wk[j];
      const double wg = rx.wg[i] * rz.wg[j];
      for (std::size_t c = 0; c < N; ++c) {
        k[c] += wk * v[c];
        g[c] += wg * v[c];
      }
    }
  }
  CellEstimate<N> out;
  out.rect = rect;
  out.value = k;
  for (std::size_t c = 0; c < N; ++c) {
    out.error = std::max(out.error, std::abs(k[c] - g[c]));
  }
  return out;
}

template <std::size_t N>
struct Result {
  Vec<N> value{};
  double error = 0.0;
  std::size_t cells = 0;
  bool converged = false;
};

/// Refines the worst cell (quadrisection) until the summed error estimate
/// drops below max(abs_tol, rel_tol * max|component|) or the cell budget runs
/// out. The initial partition is taken as given.
template <std::size_t N, class F>
Result<N> integrate(const F& f, const std::vector<Rect>& initial,
                    double rel_tol, double abs_tol, std::size_t max_cells) {
  std::priority_queue<CellEstimate<N>> heap;
  for (const Rect& r : initial) {
    if (r.area() > 0.0) heap.push(integrate_cell<N>(f, r));
  }

  auto totals = [&heap]() {
    // Recomputed from scratch to avoid drift in running sums.
    auto copy = heap;
    Vec<N> v{};
    double e = 0.0;
    while (!copy.empty()) {
      const auto& c = copy.top();
      for (std::size_t i = 0; i < N; ++i) v[i] += c.value[i];
      e += c.error;
      copy.pop();
    }
    return std::pair{v, e};
  };

  Vec<N> value{};
  double error = 0.0;
  std::tie(value, error) = totals();

  auto tolerance = [&](const Vec<N>& v) {
    double mag = 0.0;
    for (double x : v) mag = std::max(mag, std::abs(x));
    return std::max(abs_tol, rel_tol * mag);
  };

  std::size_t refinements = 0;
  while (!heap.empty() && error > tolerance(value) &&
         heap.size() + 3 <= max_cells) {
    const CellEstimate<N> worst = heap.top();
    heap.pop();
    const Rect& r = worst.rect;
    const double xm = 0.5 * (r.x_lo + r.x_hi), zm = 0.5 * (r.z_lo + r.z_hi);
    const Rect kids[4] = {{r.x_lo, xm, r.z_lo, zm},
                          {xm, r.x_hi, r.z_lo, zm},
                          {r.x_lo, xm, zm, r.z_hi},
                          {xm, r.x_hi, zm, r.z_hi}};
    for (std::size_t i = 0; i < N; ++i) value[i] -= worst.value[i];
    error -= worst.error;
    for (const Rect& kid : kids) {
      CellEstimate<N> c = integrate_cell<N>(f, kid);
      for (std::size_t i = 0; i < N; ++i) value[i] += c.value[i];
      error += c.error;
      heap.push(std::move(c));
    }
    if (++refinements % 256 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();

  Result<N> out;
  out.value = value;
  out.error = error;
  out.cells = heap.size();
  out.converged = error <= tolerance(value);
  return out;
}

}  // namespace panelfield::quad

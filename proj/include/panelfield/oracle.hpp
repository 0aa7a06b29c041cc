#pragma once

// Reference evaluations that do not use the closed form: brute-force
// cubature of the 1/r and r_hat/r^2 surface integrals, and the conventional
// point-source approximation (each sub-element collapsed to its centroid).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "panelfield/error.hpp"
#include "panelfield/kernel.hpp"
#include "panelfield/quadrature.hpp"

namespace panelfield {

enum class NearFieldMode { Plain, SubdivideTowardSingularity };

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::size_t max_subdivisions = 200000;
  NearFieldMode near_field_mode = NearFieldMode::Plain;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1) {
      throw InvalidGeometry("invalid quadrature specification");
    }
  }
};

/// Mode and tolerance suited to the distance between p and the panel.
/// Below 1e-3 the tolerance is relaxed to 1e-6; the graded partition is used
/// whenever the point is closer than one panel diagonal.
inline QuadratureSpec recommended_spec(const PanelExtent& panel,
                                       const EvalPoint& p,
                                       double rel_tol = 1e-10) {
  QuadratureSpec spec;
  spec.rel_tol = rel_tol;
  const double d = distance_to_panel(panel, p);
  if (d < panel.diagonal()) {
    spec.near_field_mode = NearFieldMode::SubdivideTowardSingularity;
  }
  if (d < 1e-3) spec.rel_tol = std::max(rel_tol, 1e-6);
  return spec;
}

struct PotentialQuadrature {
  double phi = 0.0;
  double error_estimate = 0.0;
  std::size_t cells = 0;
  bool tolerance_met = false;
};

struct ForceQuadrature {
  ForceValues force;
  double error_estimate = 0.0;
  std::size_t cells = 0;
  bool tolerance_met = false;
};

namespace detail {

// Breakpoints lo < ... < hi, dense around focus with spacing growing
// geometrically from d.
inline std::vector<double> graded_breaks(double lo, double hi, double focus,
                                         double d) {
  std::vector<double> b{lo, hi};
  if (focus > lo && focus < hi) b.push_back(focus);
  for (double h = d; h < hi - lo; h *= 2.0) {
    if (focus - h > lo) b.push_back(focus - h);
    if (focus + h < hi) b.push_back(focus + h);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

inline std::vector<quad::Rect> initial_partition(const PanelExtent& panel,
                                                 const EvalPoint& p,
                                                 NearFieldMode mode) {
  if (mode == NearFieldMode::Plain) {
    return {{panel.x1, panel.x2, panel.z1, panel.z2}};
  }
  const double fx = std::clamp(p.X, panel.x1, panel.x2);
  const double fz = std::clamp(p.Z, panel.z1, panel.z2);
  const double d = distance_to_panel(panel, p);
  const auto bx = graded_breaks(panel.x1, panel.x2, fx, d);
  const auto bz = graded_breaks(panel.z1, panel.z2, fz, d);
  std::vector<quad::Rect> cells;
  cells.reserve((bx.size() - 1) * (bz.size() - 1));
  for (std::size_t i = 0; i + 1 < bx.size(); ++i) {
    for (std::size_t k = 0; k + 1 < bz.size(); ++k) {
      cells.push_back({bx[i], bx[i + 1], bz[k], bz[k + 1]});
    }
  }
  return cells;
}

inline void require_off_surface(const PanelExtent& panel, const EvalPoint& p) {
  if (!panel.valid()) throw InvalidGeometry("invalid panel extent");
  if (!p.finite()) throw NonFinite("evaluation point is not finite");
  if (!(distance_to_panel(panel, p) > 0.0)) {
    throw InvalidGeometry("quadrature point lies on the panel surface");
  }
}

}  // namespace detail

inline PotentialQuadrature potential_quadrature(const PanelExtent& panel,
                                                const EvalPoint& p,
                                                const QuadratureSpec& spec) {
  spec.validate();
  detail::require_off_surface(panel, p);
  const double y2 = p.Y * p.Y;
  auto integrand = [&](double x, double z) {
    const double dx = p.X - x, dz = p.Z - z;
    return quad::Vec<1>{1.0 / std::sqrt(dx * dx + y2 + dz * dz)};
  };
  const auto r = quad::integrate<1>(
      integrand, detail::initial_partition(panel, p, spec.near_field_mode),
      spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
  return {r.value[0], r.error, r.cells, r.converged};
}

inline ForceQuadrature force_quadrature(const PanelExtent& panel,
                                        const EvalPoint& p,
                                        const QuadratureSpec& spec) {
  spec.validate();
  detail::require_off_surface(panel, p);
  const double y2 = p.Y * p.Y;
  auto integrand = [&](double x, double z) {
    const double dx = p.X - x, dz = p.Z - z;
    const double r2 = dx * dx + y2 + dz * dz;
    const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
    return quad::Vec<3>{dx * inv_r3, p.Y * inv_r3, dz * inv_r3};
  };
  const auto r = quad::integrate<3>(
      integrand, detail::initial_partition(panel, p, spec.near_field_mode),
      spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
  return {{r.value[0], r.value[1], r.value[2]}, r.error, r.cells, r.converged};
}

/// Conventional zeroth-order BEM comparator: the panel is split into m x m
/// equal sub-elements, each replaced by a point source at its centroid.
struct PointSourceGrid {
  int m = 1;
  double density = 1.0;
};

struct PointSource {
  double x, z, strength;
};

inline std::vector<PointSource> point_sources(const PanelExtent& panel,
                                              const PointSourceGrid& grid) {
  if (grid.m < 1) throw InvalidGeometry("point-source grid needs m >= 1");
  if (!panel.valid()) throw InvalidGeometry("invalid panel extent");
  const int m = grid.m;
  std::vector<double> xe(m + 1), ze(m + 1);
  for (int i = 0; i <= m; ++i) {
    xe[i] = i == m ? panel.x2 : panel.x1 + panel.width() * i / m;
    ze[i] = i == m ? panel.z2 : panel.z1 + panel.height() * i / m;
  }
  std::vector<PointSource> out;
  out.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      out.push_back({0.5 * (xe[i] + xe[i + 1]), 0.5 * (ze[k] + ze[k + 1]),
                     grid.density * (xe[i + 1] - xe[i]) * (ze[k + 1] - ze[k])});
    }
  }
  return out;
}

inline InfluenceValues point_source_influence(const PanelExtent& panel,
                                              const PointSourceGrid& grid,
                                              const EvalPoint& p) {
  if (!p.finite()) throw NonFinite("evaluation point is not finite");
  const double eps = geometric_tolerance(panel, p);
  const double y2 = p.Y * p.Y;
  InfluenceValues v;
  for (const PointSource& s : point_sources(panel, grid)) {
    const double dx = p.X - s.x, dz = p.Z - s.z;
    const double r2 = dx * dx + y2 + dz * dz;
    if (r2 < eps * eps) {
      throw CoincidentSource("evaluation point coincides with a point source");
    }
    const double r = std::sqrt(r2);
    const double q_r3 = s.strength / (r2 * r);
    v.phi += s.strength / r;
    v.fx += dx * q_r3;
    v.fy += p.Y * q_r3;
    v.fz += dz * q_r3;
  }
  return v;
}

/// (approx - exact) / exact, or the plain difference (absolute = true) where
/// |exact| is below zero_threshold.
struct ErrorMeasure {
  double value = 0.0;
  bool absolute = false;
};

inline ErrorMeasure normalized_error(double approx, double exact,
                                     double zero_threshold = 1e-12) {
  if (std::abs(exact) > zero_threshold) {
    return {(approx - exact) / exact, false};
  }
  return {approx - exact, true};
}

/// Relative error of the force vector, |F_approx - F_exact| / |F_exact|.
inline ErrorMeasure force_error(const InfluenceValues& approx,
                                const InfluenceValues& exact,
                                double zero_threshold = 1e-12) {
  const double dx = approx.fx - exact.fx, dy = approx.fy - exact.fy,
               dz = approx.fz - exact.fz;
  const double diff = std::sqrt(dx * dx + dy * dy + dz * dz);
  const double mag =
      std::sqrt(exact.fx * exact.fx + exact.fy * exact.fy + exact.fz * exact.fz);
  if (mag > zero_threshold) return {diff / mag, false};
  return {diff, true};
}

}  // namespace panelfield

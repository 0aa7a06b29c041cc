#pragma once

// Closed-form potential and force field of a uniform, unit-density source
// spread over a flat rectangle lying in its local XZ plane.
//
// The potential is the surface integral of 1/r and the force is the surface
// integral of r_hat/r^2, both over x1 <= x <= x2, z1 <= z <= z2, y = 0.
// No 4*pi*eps0 factor is applied anywhere.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <string>

#include "panelfield/error.hpp"

namespace panelfield {

struct PanelExtent {
  double x1 = -0.5;
  double z1 = -0.5;
  double x2 = 0.5;
  double z2 = 0.5;

  double width() const noexcept { return x2 - x1; }   // along local x
  double height() const noexcept { return z2 - z1; }  // along local z
  double area() const noexcept { return width() * height(); }
  double diagonal() const noexcept { return std::hypot(width(), height()); }
  double center_x() const noexcept { return 0.5 * (x1 + x2); }
  double center_z() const noexcept { return 0.5 * (z1 + z2); }

  bool valid() const noexcept {
    return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(z1) &&
           std::isfinite(z2) && x1 < x2 && z1 < z2 &&
           std::isfinite(width()) && std::isfinite(height());
  }

  /// Panel of sides a (along x) and b (along z) centred on the origin.
  static PanelExtent centered(double a, double b) {
    return {-0.5 * a, -0.5 * b, 0.5 * a, 0.5 * b};
  }
};

/// Point in panel-local coordinates; Y is the offset along the panel normal.
struct EvalPoint {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;

  bool finite() const noexcept {
    return std::isfinite(X) && std::isfinite(Y) && std::isfinite(Z);
  }
  double norm() const noexcept { return std::sqrt(X * X + Y * Y + Z * Z); }
};

enum class FootprintClass { Inside, Outside, OnEdgeProjection };

inline const char* to_string(FootprintClass c) noexcept {
  switch (c) {
    case FootprintClass::Inside:
      return "inside";
    case FootprintClass::Outside:
      return "outside";
    case FootprintClass::OnEdgeProjection:
      return "on_edge_projection";
  }
  return "?";
}

struct InfluenceValues {
  double phi = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double fz = 0.0;
};

/// Corner distances and auxiliary products used by the closed form.
/// Index convention: first digit selects x1/x2, second z1/z2.
struct KernelIntermediates {
  double D11, D12, D21, D22;
  double R1, R2;
  double I1, I2;
  int S1, S2;
};

/// Special handling applied at a point. X and Z mark coordinates that sat on
/// an edge line and were replaced by the mean of the two points offset by
/// the geometric tolerance; InPlane marks |Y| below the tolerance, where the
/// normal force is replaced by its two-sided mean.
enum PerturbedAxis : std::uint8_t {
  kPerturbedNone = 0,
  kPerturbedX = 1 << 0,
  kPerturbedY = 1 << 1,  // in plane
  kPerturbedZ = 1 << 2,
};

struct Evaluation {
  InfluenceValues values;
  std::uint8_t perturbed = kPerturbedNone;
  double epsilon = 0.0;          // geometric tolerance used at this point
  double imag_residue = 0.0;     // discarded imaginary part (max over terms)
  bool fy_defined = true;        // false exactly on the surface, Inside
  FootprintClass footprint = FootprintClass::Outside;
};

/// Geometric tolerance: 1e-12 of the larger of the panel diagonal, the
/// point's distance from the local origin and one length unit.
inline double geometric_tolerance(const PanelExtent& panel,
                                  const EvalPoint& p) noexcept {
  return 1e-12 * std::max({panel.diagonal(), p.norm(), 1.0});
}

namespace detail {

inline double segment_distance(double u, double v_lo, double v_hi, double y,
                               double v) noexcept {
  // Distance from (u, y, v) to the segment {(0, 0, t) : v_lo <= t <= v_hi}.
  const double dv = v < v_lo ? v_lo - v : (v > v_hi ? v - v_hi : 0.0);
  return std::sqrt(u * u + y * y + dv * dv);
}

}  // namespace detail

/// Shortest 3-D distance from p to the panel boundary (four edge segments).
inline double distance_to_edges(const PanelExtent& panel,
                                const EvalPoint& p) noexcept {
  using detail::segment_distance;
  return std::min(
      {segment_distance(p.X - panel.x1, panel.z1, panel.z2, p.Y, p.Z),
       segment_distance(p.X - panel.x2, panel.z1, panel.z2, p.Y, p.Z),
       segment_distance(p.Z - panel.z1, panel.x1, panel.x2, p.Y, p.X),
       segment_distance(p.Z - panel.z2, panel.x1, panel.x2, p.Y, p.X)});
}

/// Shortest 3-D distance from p to the (filled) panel.
inline double distance_to_panel(const PanelExtent& panel,
                                const EvalPoint& p) noexcept {
  const double dx = std::max({panel.x1 - p.X, 0.0, p.X - panel.x2});
  const double dz = std::max({panel.z1 - p.Z, 0.0, p.Z - panel.z2});
  return std::sqrt(dx * dx + p.Y * p.Y + dz * dz);
}

inline FootprintClass classify_footprint(const PanelExtent& panel,
                                         const EvalPoint& p) noexcept {
  const double eps = geometric_tolerance(panel, p);
  const bool x_in = p.X > panel.x1 + eps && p.X < panel.x2 - eps;
  const bool z_in = p.Z > panel.z1 + eps && p.Z < panel.z2 - eps;
  if (x_in && z_in) return FootprintClass::Inside;
  const bool x_span = p.X >= panel.x1 - eps && p.X <= panel.x2 + eps;
  const bool z_span = p.Z >= panel.z1 - eps && p.Z <= panel.z2 + eps;
  const bool near_x_edge = std::abs(p.X - panel.x1) <= eps ||
                           std::abs(p.X - panel.x2) <= eps;
  const bool near_z_edge = std::abs(p.Z - panel.z1) <= eps ||
                           std::abs(p.Z - panel.z2) <= eps;
  if ((near_x_edge && z_span) || (near_z_edge && x_span)) {
    return FootprintClass::OnEdgeProjection;
  }
  return FootprintClass::Outside;
}

inline KernelIntermediates compute_intermediates(const PanelExtent& panel,
                                                 const EvalPoint& p) noexcept {
  const double u1 = p.X - panel.x1, u2 = p.X - panel.x2;
  const double c1 = p.Z - panel.z1, c2 = p.Z - panel.z2;
  const double y2 = p.Y * p.Y, ay = std::abs(p.Y);
  KernelIntermediates k;
  k.D11 = std::sqrt(u1 * u1 + y2 + c1 * c1);
  k.D12 = std::sqrt(u1 * u1 + y2 + c2 * c2);
  k.D21 = std::sqrt(u2 * u2 + y2 + c1 * c1);
  k.D22 = std::sqrt(u2 * u2 + y2 + c2 * c2);
  k.R1 = y2 + c1 * c1;
  k.R2 = y2 + c2 * c2;
  k.I1 = u1 * ay;
  k.I2 = u2 * ay;
  // sign(0) = +1
  k.S1 = (panel.z1 - p.Z) >= 0.0 ? 1 : -1;
  k.S2 = (panel.z2 - p.Z) >= 0.0 ? 1 : -1;
  return k;
}

/// Potential at the centroid of an a x b rectangle.
inline double potential_centroid(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InvalidGeometry("potential_centroid: side lengths must be positive");
  }
  const double d = std::hypot(a, b);
  return 2.0 * (a * std::log((d + b) / a) + b * std::log((d + a) / b));
}

namespace detail {

// ln((Dn - tn) / (Dd - td)) for two corners sharing the lateral offset
// (q = a^2 + Y^2 in common), where td - tn = span > 0.
// Uses (D - t)(D + t) = q so no difference of nearly equal numbers is formed.
inline double pair_log(double q, double tn, double Dn, double td, double Dd,
                       double span) {
  double ratio;
  if (tn > 0.0) {
    // Both t positive: ln((Dd + td) / (Dn + tn)).
    const double P = Dd + td, Q = Dn + tn;
    ratio = span * (P + Q) / ((Dd + Dn) * Q);
  } else {
    const double N = Dn - tn;
    const double M = td <= 0.0 ? Dd - td : q / (Dd + td);
    if (!(M > 0.0)) {
      throw EdgeSingularity("closed form hit a panel edge (zero log argument)");
    }
    ratio = span * (N + M) / ((Dn + Dd) * M);
  }
  return std::log1p(ratio);
}

// Imaginary part of the corner term atanh(w) - atanh(conj(w)) split into a
// small remainder and an integer multiple of pi, plus the real residue that
// the principal-branch difference should cancel.
struct CornerTerm {
  std::complex<double> small;  // T = small + i*pi*winding
  int winding = 0;
};

inline CornerTerm corner_term(double R, double I, double D, double c_abs) {
  const std::complex<double> w(R / (D * c_abs), I / (D * c_abs));
  CornerTerm t;
  if (std::abs(w) > 1.0) {
    if (w.imag() == 0.0) {
      throw NonFinite("arctanh argument on the branch cut");
    }
    // atanh(w) = atanh(1/w) + i*pi/2*sgn(Im w) on the principal branch.
    const std::complex<double> inv = 1.0 / w;
    t.small = std::atanh(inv) - std::atanh(std::conj(inv));
    t.winding = w.imag() > 0.0 ? 1 : -1;
  } else {
    t.small = std::atanh(w) - std::atanh(std::conj(w));
  }
  return t;
}

struct RawResult {
  InfluenceValues values;
  double imag_residue = 0.0;
};

// Direct application of the closed form at a point with no degenerate
// coordinate (Y != 0, X != x_i, Z != z_k).
inline RawResult evaluate_raw(const PanelExtent& panel, const EvalPoint& p) {
  const double u1 = p.X - panel.x1, u2 = p.X - panel.x2;
  const double c1 = p.Z - panel.z1, c2 = p.Z - panel.z2;
  const double ay = std::abs(p.Y);
  const KernelIntermediates k = compute_intermediates(panel, p);
  const double a = panel.width(), b = panel.height();

  const double qx1 = u1 * u1 + p.Y * p.Y, qx2 = u2 * u2 + p.Y * p.Y;
  const double qz1 = c1 * c1 + p.Y * p.Y, qz2 = c2 * c2 + p.Y * p.Y;

  // LA = ln((D12 - c2)/(D11 - c1)), LB = ln((D22 - c2)/(D21 - c1)),
  // LC = ln((D21 - u2)/(D11 - u1)), LD = ln((D22 - u2)/(D12 - u1)).
  const double LA = pair_log(qx1, c2, k.D12, c1, k.D11, b);
  const double LB = pair_log(qx2, c2, k.D22, c1, k.D21, b);
  const double LC = pair_log(qz1, u2, k.D21, u1, k.D11, a);
  const double LD = pair_log(qz2, u2, k.D22, u1, k.D12, a);

  const double log_part = u1 * LA - u2 * LB + c1 * LC - c2 * LD;

  const CornerTerm t11 = corner_term(k.R1, k.I1, k.D11, std::abs(c1));
  const CornerTerm t21 = corner_term(k.R1, k.I2, k.D21, std::abs(c1));
  const CornerTerm t22 = corner_term(k.R2, k.I2, k.D22, std::abs(c2));
  const CornerTerm t12 = corner_term(k.R2, k.I1, k.D12, std::abs(c2));

  const std::complex<double> g_small =
      double(k.S1) * (t11.small - t21.small) +
      double(k.S2) * (t22.small - t12.small);
  const bool inside = p.X > panel.x1 && p.X < panel.x2 && p.Z > panel.z1 &&
                      p.Z < panel.z2;
  // Integer multiples of pi from the branch identity, plus the constant of
  // integration (2*pi on each side) inside the footprint.
  const int winding = k.S1 * (t11.winding - t21.winding) +
                      k.S2 * (t22.winding - t12.winding) + (inside ? 4 : 0);
  // At Y == 0 the group carries a zero weight; skip it so an infinite
  // arctanh at |w| == 1 cannot turn into 0 * inf.
  const double angle =
      ay == 0.0 ? 0.0 : g_small.imag() + std::numbers::pi * winding;
  const double sign_y = p.Y >= 0.0 ? 1.0 : -1.0;

  RawResult r;
  r.values.phi = log_part - 0.5 * ay * angle;
  r.values.fx = LB - LA;
  r.values.fz = LD - LC;
  r.values.fy = 0.5 * sign_y * angle;
  r.imag_residue = 0.5 * std::max(ay, 1.0) * std::abs(g_small.real());
  return r;
}

}  // namespace detail

/// Evaluates potential and force together, applying the degenerate-coordinate
/// perturbation where needed. Throws EdgeSingularity within the geometric
/// tolerance of an edge, NonFinite on overflow. Exactly on the surface inside
/// the footprint the normal force is reported as 0 with fy_defined = false.
inline Evaluation evaluate(const PanelExtent& panel, const EvalPoint& p) {
  if (!panel.valid()) throw InvalidGeometry("invalid panel extent");
  if (!p.finite()) throw NonFinite("evaluation point is not finite");

  Evaluation out;
  out.epsilon = geometric_tolerance(panel, p);
  out.footprint = classify_footprint(panel, p);
  const double eps = out.epsilon;
  if (distance_to_edges(panel, p) < eps) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "point (" << p.X << ", " << p.Y << ", " << p.Z
        << ") lies on a panel edge";
    throw EdgeSingularity(msg.str());
  }

  const bool deg_y = std::abs(p.Y) < eps;
  const bool deg_x =
      std::abs(p.X - panel.x1) < eps || std::abs(p.X - panel.x2) < eps;
  const bool deg_z =
      std::abs(p.Z - panel.z1) < eps || std::abs(p.Z - panel.z2) < eps;
  if (deg_x) out.perturbed |= kPerturbedX;
  if (deg_y) out.perturbed |= kPerturbedY;
  if (deg_z) out.perturbed |= kPerturbedZ;

  // In plane the arctangent group is multiplied by |Y| and drops out of the
  // potential, so Y is used as given; the normal force is odd in Y and its
  // two-sided mean is zero.
  const std::array<double, 2> both{-1.0, 1.0};
  const std::array<double, 1> none{0.0};
  const auto xs = deg_x ? std::span<const double>(both)
                        : std::span<const double>(none);
  const auto zs = deg_z ? std::span<const double>(both)
                        : std::span<const double>(none);

  InfluenceValues sum;
  int count = 0;
  for (double sx : xs) {
    for (double sz : zs) {
      const EvalPoint q{p.X + sx * eps, p.Y, p.Z + sz * eps};
      const detail::RawResult r = detail::evaluate_raw(panel, q);
      sum.phi += r.values.phi;
      sum.fx += r.values.fx;
      sum.fy += r.values.fy;
      sum.fz += r.values.fz;
      out.imag_residue = std::max(out.imag_residue, r.imag_residue);
      ++count;
    }
  }
  out.values.phi = sum.phi / count;
  out.values.fx = sum.fx / count;
  out.values.fz = sum.fz / count;
  out.values.fy = deg_y ? 0.0 : sum.fy / count;
  out.fy_defined = !(deg_y && out.footprint == FootprintClass::Inside);

  const InfluenceValues& v = out.values;
  if (!std::isfinite(v.phi) || !std::isfinite(v.fx) || !std::isfinite(v.fy) ||
      !std::isfinite(v.fz)) {
    throw NonFinite("closed form produced a non-finite value");
  }
  return out;
}

inline double potential_exact(const PanelExtent& panel, const EvalPoint& p) {
  return evaluate(panel, p).values.phi;
}

struct ForceValues {
  double fx = 0.0;
  double fy = 0.0;
  double fz = 0.0;
};

inline ForceValues force_exact(const PanelExtent& panel, const EvalPoint& p) {
  const Evaluation e = evaluate(panel, p);
  if (!e.fy_defined) {
    throw OnSurfaceAmbiguity(
        "normal force is discontinuous on the panel surface", e.values.fx,
        e.values.fz);
  }
  return {e.values.fx, e.values.fy, e.values.fz};
}

}  // namespace panelfield

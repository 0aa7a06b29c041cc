#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelfield/error.hpp"
#include "panelfield/kernel.hpp"

namespace panelfield {

using Vec3 = Eigen::Vector3d;

/// Rigid placement of a panel-local coordinate system. Columns of `basis`
/// are the local x, y (panel normal) and z axes in global coordinates.
struct Frame {
  Vec3 origin = Vec3::Zero();
  Eigen::Matrix3d basis = Eigen::Matrix3d::Identity();

  Vec3 x_axis() const { return basis.col(0); }
  Vec3 normal() const { return basis.col(1); }
  Vec3 z_axis() const { return basis.col(2); }

  bool orthonormal(double tol = 1e-14) const {
    return (basis.transpose() * basis - Eigen::Matrix3d::Identity())
                   .cwiseAbs()
                   .maxCoeff() <= tol &&
           basis.determinant() > 0.0;
  }

  static Frame identity() { return {}; }

  /// Frame from a local x axis and normal; the local z axis completes a
  /// right-handed set (z = x cross y).
  static Frame from_axes(const Vec3& origin, const Vec3& x_axis,
                         const Vec3& normal) {
    Frame f;
    f.origin = origin;
    f.basis.col(0) = x_axis;
    f.basis.col(1) = normal;
    f.basis.col(2) = x_axis.cross(normal);
    if (!f.orthonormal(1e-12)) {
      throw InvalidGeometry("frame axes are not orthonormal");
    }
    return f;
  }
};

inline EvalPoint to_local(const Frame& frame, const Vec3& global) {
  const Vec3 l = frame.basis.transpose() * (global - frame.origin);
  return {l.x(), l.y(), l.z()};
}

inline Vec3 to_global(const Frame& frame, const EvalPoint& local) {
  return frame.origin + frame.basis * Vec3(local.X, local.Y, local.Z);
}

/// Rotates a local vector (e.g. a force) into global components.
inline Vec3 direction_to_global(const Frame& frame, const Vec3& local) {
  return frame.basis * local;
}

struct Panel {
  PanelExtent extent;
  Frame frame;
  double area = 0.0;
  // Collocation point as a fraction of the extent along local x and z.
  double collocation_u = 0.5;
  double collocation_v = 0.5;

  EvalPoint collocation_local() const {
    return {extent.x1 + collocation_u * extent.width(), 0.0,
            extent.z1 + collocation_v * extent.height()};
  }
  Vec3 collocation() const { return to_global(frame, collocation_local()); }
  Vec3 centroid() const {
    return to_global(frame, {extent.center_x(), 0.0, extent.center_z()});
  }
  std::array<Vec3, 4> corners() const {
    return {to_global(frame, {extent.x1, 0.0, extent.z1}),
            to_global(frame, {extent.x2, 0.0, extent.z1}),
            to_global(frame, {extent.x2, 0.0, extent.z2}),
            to_global(frame, {extent.x1, 0.0, extent.z2})};
  }
};

enum class ShapeTag { Plate, Cube, Custom };

inline const char* to_string(ShapeTag s) noexcept {
  switch (s) {
    case ShapeTag::Plate:
      return "plate";
    case ShapeTag::Cube:
      return "cube";
    case ShapeTag::Custom:
      return "custom";
  }
  return "?";
}

enum class GradingMode { Uniform, Geometric };

/// Cell-size law along each side. `ratio` is the size of the largest
/// (central) cell over the smallest (edge) cell.
struct GradingSpec {
  GradingMode mode = GradingMode::Uniform;
  double ratio = 1.0;

  static GradingSpec uniform() { return {}; }
  static GradingSpec geometric(double ratio) {
    if (!std::isfinite(ratio) || ratio < 1.0) {
      throw InvalidGrading("grading ratio must be finite and >= 1");
    }
    if (ratio == 1.0) return uniform();
    return {GradingMode::Geometric, ratio};
  }
  /// Uniform for ratio 1, geometric otherwise.
  static GradingSpec from_ratio(double ratio) { return geometric(ratio); }

  void validate() const {
    if (!std::isfinite(ratio) || ratio < 1.0) {
      throw InvalidGrading("grading ratio must be finite and >= 1");
    }
    if ((mode == GradingMode::Uniform) != (ratio == 1.0)) {
      throw InvalidGrading("grading ratio 1 must coincide with uniform mode");
    }
  }
};

/// Cell boundaries of [-0.5, 0.5] split into n cells. In geometric mode the
/// widths shrink by a constant factor from the centre towards both ends,
/// with centre/edge width equal to the grading ratio.
inline std::vector<double> graded_breaks(int n, const GradingSpec& grading) {
  if (n < 1) throw InvalidGeometry("cell count must be >= 1");
  grading.validate();
  std::vector<double> w(n, 1.0);
  // Distance index from the centre: 0 (odd n) or 1 (even n) for the central
  // cell(s), n - 1 for the two end cells.
  const int d_min = n % 2 == 1 ? 0 : 1;
  const int d_max = n - 1;
  if (grading.mode == GradingMode::Geometric && d_max > d_min) {
    for (int i = 0; i < n; ++i) {
      const int d = std::abs(2 * i - (n - 1));
      w[i] = std::pow(grading.ratio,
                      -double(d - d_min) / double(d_max - d_min));
    }
  }
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<double> b(n + 1);
  b[0] = -0.5;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i];
    b[i + 1] = i + 1 == n ? 0.5 : acc / total - 0.5;
  }
  // Mirror so the breaks are exactly symmetric about 0.
  for (int i = 0; i <= n / 2; ++i) {
    const double s = 0.5 * (b[n - i] - b[i]);
    b[i] = -s;
    b[n - i] = s;
  }
  if (n % 2 == 0) b[n / 2] = 0.0;
  return b;
}

struct Mesh {
  std::vector<Panel> panels;
  ShapeTag shape = ShapeTag::Custom;
  GradingSpec grading;

  std::size_t size() const noexcept { return panels.size(); }
  double total_area() const {
    double s = 0.0, c = 0.0;  // Neumaier
    for (const Panel& p : panels) {
      const double t = s + p.area;
      c += std::abs(s) >= std::abs(p.area) ? (s - t) + p.area
                                           : (p.area - t) + s;
      s = t;
    }
    return s + c;
  }
};

namespace detail {

// Panel with its frame at the cell centre, for a cell [u0,u1] x [v0,v1]
// measured along `x_axis` and `z_axis` on the plane through `plane_origin`.
inline Panel make_cell(const Vec3& plane_origin, const Vec3& x_axis,
                       const Vec3& normal, double u0, double u1, double v0,
                       double v1) {
  Panel p;
  const double uc = 0.5 * (u0 + u1), vc = 0.5 * (v0 + v1);
  const Vec3 z_axis = x_axis.cross(normal);
  p.frame = Frame::from_axes(plane_origin + uc * x_axis + vc * z_axis, x_axis,
                             normal);
  p.extent = PanelExtent::centered(u1 - u0, v1 - v0);
  p.area = (u1 - u0) * (v1 - v0);
  return p;
}

}  // namespace detail

/// Unit square plate on [-0.5, 0.5]^2 in the global XZ plane, normal +Y.
/// Panels are ordered row-major (x index outer, z index inner).
inline Mesh mesh_plate(int nx, int nz, const GradingSpec& grading) {
  if (nx < 1 || nz < 1) throw InvalidGeometry("plate needs nx, nz >= 1");
  const auto bx = graded_breaks(nx, grading);
  const auto bz = graded_breaks(nz, grading);
  Mesh mesh;
  mesh.shape = ShapeTag::Plate;
  mesh.grading = grading;
  mesh.panels.reserve(static_cast<std::size_t>(nx) * nz);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nz; ++k) {
      mesh.panels.push_back(detail::make_cell(Vec3::Zero(), Vec3::UnitX(),
                                              Vec3::UnitY(), bx[i], bx[i + 1],
                                              bz[k], bz[k + 1]));
    }
  }
  return mesh;
}

struct CubeFace {
  Vec3 normal;  // outward
  Vec3 x_axis;  // local x in the face plane
};

/// Faces in fixed order -X, +X, -Y, +Y, -Z, +Z. The local z axis of each
/// face is x_axis cross normal.
inline const std::array<CubeFace, 6>& cube_faces() {
  static const std::array<CubeFace, 6> faces{{
      {-Vec3::UnitX(), Vec3::UnitY()},
      {Vec3::UnitX(), Vec3::UnitY()},
      {-Vec3::UnitY(), Vec3::UnitZ()},
      {Vec3::UnitY(), Vec3::UnitZ()},
      {-Vec3::UnitZ(), Vec3::UnitX()},
      {Vec3::UnitZ(), Vec3::UnitX()},
  }};
  return faces;
}

/// Unit cube [-0.5, 0.5]^3 with n x n panels per face, local +Y outward.
/// Ordered by (face, row, column).
inline Mesh mesh_cube(int n, const GradingSpec& grading) {
  if (n < 1) throw InvalidGeometry("cube needs n >= 1");
  const auto b = graded_breaks(n, grading);
  Mesh mesh;
  mesh.shape = ShapeTag::Cube;
  mesh.grading = grading;
  mesh.panels.reserve(6 * static_cast<std::size_t>(n) * n);
  for (const CubeFace& face : cube_faces()) {
    const Vec3 centre = 0.5 * face.normal;
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        mesh.panels.push_back(detail::make_cell(
            centre, face.x_axis, face.normal, b[i], b[i + 1], b[k], b[k + 1]));
      }
    }
  }
  return mesh;
}

namespace detail {
inline nlohmann::json to_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}
}  // namespace detail

/// Panel corners, frames and areas, for debugging and golden files.
inline nlohmann::json mesh_to_json(const Mesh& mesh) {
  using nlohmann::json;
  json panels = json::array();
  for (std::size_t i = 0; i < mesh.panels.size(); ++i) {
    const Panel& p = mesh.panels[i];
    json corners = json::array();
    for (const Vec3& c : p.corners()) corners.push_back(detail::to_json(c));
    panels.push_back({
        {"index", i},
        {"area", p.area},
        {"extent", {p.extent.x1, p.extent.z1, p.extent.x2, p.extent.z2}},
        {"origin", detail::to_json(p.frame.origin)},
        {"basis",
         {detail::to_json(p.frame.x_axis()), detail::to_json(p.frame.normal()),
          detail::to_json(p.frame.z_axis())}},
        {"corners", corners},
        {"collocation", detail::to_json(p.collocation())},
    });
  }
  return {
      {"shape", to_string(mesh.shape)},
      {"grading",
       {{"mode", mesh.grading.mode == GradingMode::Uniform ? "uniform"
                                                           : "geometric"},
        {"ratio", mesh.grading.ratio}}},
      {"elements", mesh.panels.size()},
      {"panels", panels},
  };
}

}  // namespace panelfield

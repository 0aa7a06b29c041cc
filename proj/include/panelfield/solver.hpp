#pragma once

// Collocation boundary-element solver built on the closed-form panel
// potential: unknown uniform source density per panel, Dirichlet condition
// enforced at one collocation point per panel.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelfield/error.hpp"
#include "panelfield/geometry.hpp"
#include "panelfield/kernel.hpp"
#include "panelfield/parallel.hpp"

namespace panelfield {

/// Entry (i, j): potential at collocation point i due to unit density on
/// panel j.
struct InfluenceMatrix {
  Eigen::MatrixXd values;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(values.rows());
  }
};

/// Prescribed potential per collocation point.
struct BoundaryCondition {
  Eigen::VectorXd potential;

  static BoundaryCondition constant(std::size_t n, double value = 1.0) {
    return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value)};
  }
};

struct Solution {
  Eigen::VectorXd densities;
  double capacitance = 0.0;
  double solve_residual = 0.0;
  double condition_estimate = 0.0;
};

namespace detail {

struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace detail

inline InfluenceMatrix assemble(const Mesh& mesh, unsigned threads = 1) {
  const std::size_t n = mesh.size();
  if (n == 0) throw InvalidGeometry("cannot assemble an empty mesh");
  std::vector<Vec3> colloc(n);
  for (std::size_t i = 0; i < n; ++i) colloc[i] = mesh.panels[i].collocation();

  InfluenceMatrix A;
  A.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Panel& pj = mesh.panels[j];
      A.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          potential_exact(pj.extent, to_local(pj.frame, colloc[i]));
    }
  });
  return A;
}

/// Dense LU with partial pivoting. Capacitance is left at zero here; it
/// needs panel areas (see capacitance()/solve_mesh()).
inline Solution solve(const InfluenceMatrix& matrix,
                      const BoundaryCondition& bc) {
  const auto& A = matrix.values;
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw InvalidGeometry("influence matrix must be square and non-empty");
  }
  if (bc.potential.size() != A.rows()) {
    throw InvalidGeometry("boundary condition size does not match matrix");
  }
  if (!A.allFinite() || !bc.potential.allFinite()) {
    throw NonFinite("influence matrix or boundary condition is not finite");
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd& factors = lu.matrixLU();
  const double scale = factors.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < factors.rows(); ++i) {
    if (!(std::abs(factors(i, i)) > 1e-14 * scale)) {
      throw SingularMatrix("influence matrix is numerically singular");
    }
  }
  Solution s;
  s.densities = lu.solve(bc.potential);
  if (!s.densities.allFinite()) {
    throw SingularMatrix("solve produced non-finite densities");
  }
  s.solve_residual = (A * s.densities - bc.potential).cwiseAbs().maxCoeff();
  const double rcond = lu.rcond();
  s.condition_estimate = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  return s;
}

/// Total charge sum(density_j * area_j), fixed order, compensated.
inline double capacitance(const Solution& solution, const Mesh& mesh) {
  if (static_cast<std::size_t>(solution.densities.size()) != mesh.size()) {
    throw InvalidGeometry("solution does not match mesh");
  }
  detail::CompensatedSum q;
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    q.add(solution.densities(static_cast<Eigen::Index>(j)) *
          mesh.panels[j].area);
  }
  return q.value();
}

/// Assemble, solve for unit potential and fill in the capacitance.
inline Solution solve_mesh(const Mesh& mesh, unsigned threads = 1,
                           double potential = 1.0) {
  const InfluenceMatrix A = assemble(mesh, threads);
  Solution s = solve(A, BoundaryCondition::constant(mesh.size(), potential));
  s.capacitance = capacitance(s, mesh);
  return s;
}

/// Superposed potential and force (global components) at a point.
struct FieldSample {
  double phi = 0.0;
  Vec3 force = Vec3::Zero();
  std::uint8_t perturbed = kPerturbedNone;
  bool force_defined = true;  // false on a panel surface
};

inline FieldSample field_at(const Mesh& mesh, const Solution& solution,
                            const Vec3& point) {
  if (static_cast<std::size_t>(solution.densities.size()) != mesh.size()) {
    throw InvalidGeometry("solution does not match mesh");
  }
  FieldSample out;
  detail::CompensatedSum phi;
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const Panel& p = mesh.panels[j];
    const Evaluation e = evaluate(p.extent, to_local(p.frame, point));
    const double sigma = solution.densities(static_cast<Eigen::Index>(j));
    phi.add(sigma * e.values.phi);
    out.force += sigma * direction_to_global(
                             p.frame, Vec3(e.values.fx, e.values.fy,
                                           e.values.fz));
    out.perturbed |= e.perturbed;
    out.force_defined = out.force_defined && e.fy_defined;
  }
  out.phi = phi.value();
  return out;
}

struct ConvergenceRow {
  int n = 0;
  std::size_t elements = 0;
  double capacitance = 0.0;
  double delta = 0.0;  // relative change from the previous row (0 for first)
  double solve_residual = 0.0;
  double condition_estimate = 0.0;
};

inline Mesh make_mesh(ShapeTag shape, int n, const GradingSpec& grading) {
  switch (shape) {
    case ShapeTag::Plate:
      return mesh_plate(n, n, grading);
    case ShapeTag::Cube:
      return mesh_cube(n, grading);
    case ShapeTag::Custom:
      break;
  }
  throw InvalidGeometry("convergence study needs a plate or cube");
}

/// Solves each mesh in turn; `on_solve` (optional) sees every mesh and its
/// solution, e.g. to keep the finest one.
inline std::vector<ConvergenceRow> convergence_study(
    ShapeTag shape, const std::vector<int>& n_list, const GradingSpec& grading,
    unsigned threads = 1,
    const std::function<void(int, const Mesh&, const Solution&)>& on_solve =
        {}) {
  if (n_list.empty()) throw InvalidGeometry("n_list must not be empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw InvalidGeometry("n_list must be strictly increasing");
    }
  }
  std::vector<ConvergenceRow> rows;
  for (int n : n_list) {
    const Mesh mesh = make_mesh(shape, n, grading);
    const Solution s = solve_mesh(mesh, threads);
    if (on_solve) on_solve(n, mesh, s);
    ConvergenceRow row{n, mesh.size(), s.capacitance, 0.0, s.solve_residual,
                       s.condition_estimate};
    if (!rows.empty()) {
      row.delta = (row.capacitance - rows.back().capacitance) /
                  rows.back().capacitance;
    }
    rows.push_back(row);
  }
  return rows;
}

/// {shape, n, grading_ratio, elements, capacitance, solve_residual,
///  condition_estimate}
inline nlohmann::json solution_summary(const Mesh& mesh, int n,
                                       const Solution& s) {
  return {
      {"shape", to_string(mesh.shape)},
      {"n", n},
      {"grading_ratio", mesh.grading.ratio},
      {"elements", mesh.size()},
      {"capacitance", s.capacitance},
      {"solve_residual", s.solve_residual},
      {"condition_estimate", s.condition_estimate},
  };
}

}  // namespace panelfield

#pragma once

// Command implementations behind the panelfield executable. Parsing lives in
// main.cpp; everything here is callable in-process.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "panelfield/geometry.hpp"
#include "panelfield/kernel.hpp"
#include "panelfield/solver.hpp"

namespace panelfield::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 2, kNumericalFailure = 3 };

/// 2 for bad input or geometry (edges, coincident sources, ...), 3 for
/// failures of the numerics (singular matrix, non-finite results).
int exit_code_for(const std::exception& e) noexcept;

enum class MethodKind { Exact, PointSource, Quadrature };

/// exact | point_source:<m> | quadrature
struct Method {
  MethodKind kind = MethodKind::Exact;
  int m = 0;

  std::string tag() const;
  static Method parse(std::string_view text);
  static std::vector<Method> parse_list(std::string_view comma_separated);
};

Vec3 parse_vec3(std::string_view text);
PanelExtent parse_panel(std::string_view text);

// eval

struct EvalOptions {
  PanelExtent panel{-0.5, -0.5, 0.5, 0.5};
  EvalPoint point{};
  Method method{};
  double rel_tol = 1e-10;
};

struct EvalOutput {
  Method method;
  InfluenceValues values;
  bool fy_defined = true;
  std::vector<std::string> flags;
};

EvalOutput run_eval(const EvalOptions& options);

/// "<tag> phi=... fx=... fy=... fz=..." plus " flags=a;b" when present.
std::string format_eval(const EvalOutput& out);

// scan

struct ScanSpec {
  std::string name = "line";
  std::vector<Vec3> points;
  std::vector<Method> methods;
};

/// Evenly spaced points from start to end inclusive.
ScanSpec line_scan(const Vec3& start, const Vec3& end, int samples,
                   std::vector<Method> methods);

/// diagonal: (-1.5,-1.5,-1.5) to (1.5,1.5,1.5), 101 samples.
/// edge: (x, 1e-8, -0.5) for x in [-1.5, 1.5], 101 samples.
/// surface: samples x samples grid over [-1,1]^2 at Y = 1e-8, 41 per side.
/// samples <= 0 selects the default count.
ScanSpec preset_scan(std::string_view name, int samples,
                     std::vector<Method> methods);

std::vector<Method> default_scan_methods();

struct ScanRow {
  Vec3 point = Vec3::Zero();
  std::string method;
  std::optional<double> phi, fx, fy, fz, err_phi, err_f;
  std::vector<std::string> flags;
};

/// Rows ordered by point, then by method. Errors are relative to the exact
/// kernel (absolute where the exact value is zero, flagged).
std::vector<ScanRow> run_scan(const ScanSpec& spec, const PanelExtent& panel,
                              unsigned threads, double rel_tol = 1e-10);

/// x,y,z,method,phi,fx,fy,fz,err_phi,err_f,flags. Values that could not be
/// evaluated are left empty and named in flags.
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);

// capacitance

struct CapacitanceOptions {
  ShapeTag shape = ShapeTag::Plate;
  std::vector<int> n_list{1};
  double grading = 1.0;
  unsigned threads = 1;
};

struct CapacitanceReport {
  ShapeTag shape = ShapeTag::Plate;
  double grading = 1.0;
  std::vector<ConvergenceRow> rows;
  Mesh mesh;          // finest mesh
  Solution solution;  // its solution
};

ShapeTag parse_shape(std::string_view text);
std::vector<int> parse_int_list(std::string_view comma_separated);

CapacitanceReport run_capacitance(const CapacitanceOptions& options);

/// {shape, grading_ratio, rows: [...], final: solution_summary}
nlohmann::json capacitance_json(const CapacitanceReport& report);

/// Fixed-width convergence table for the terminal.
void print_convergence(std::ostream& os, const CapacitanceReport& report);

}  // namespace panelfield::cli

#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <system_error>

#include "panelfield/csv.hpp"
#include "panelfield/error.hpp"
#include "panelfield/oracle.hpp"
#include "panelfield/parallel.hpp"

namespace panelfield::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidGeometry(std::string("cannot parse ") + what + " from '" +
                          std::string(s) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      throw InvalidGeometry(std::string(what) + " must be finite");
    }
  }
  return v;
}

std::vector<double> parse_doubles(std::string_view text, std::size_t count,
                                  const char* what) {
  const auto parts = split(text, ',');
  if (parts.size() != count) {
    throw InvalidGeometry(std::string(what) + " needs " +
                          std::to_string(count) + " comma-separated values");
  }
  std::vector<double> out;
  for (auto p : parts) out.push_back(parse_number<double>(p, what));
  return out;
}

void add_perturbation_flags(std::uint8_t perturbed,
                            std::vector<std::string>& flags) {
  if (perturbed & kPerturbedX) flags.emplace_back("perturbed_x");
  if (perturbed & kPerturbedY) flags.emplace_back("in_plane");
  if (perturbed & kPerturbedZ) flags.emplace_back("perturbed_z");
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string field(const std::optional<double>& v) {
  return v ? csv::format(*v) : std::string();
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const SingularMatrix*>(&e) ||
      dynamic_cast<const NonFinite*>(&e)) {
    return kNumericalFailure;
  }
  if (dynamic_cast<const Error*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::ios_base::failure*>(&e)) {
    return kInputError;
  }
  return kNumericalFailure;
}

std::string Method::tag() const {
  switch (kind) {
    case MethodKind::Exact:
      return "exact";
    case MethodKind::PointSource:
      return "point_source:" + std::to_string(m);
    case MethodKind::Quadrature:
      return "quadrature";
  }
  return "?";
}

Method Method::parse(std::string_view text) {
  text = trim(text);
  if (text == "exact") return {MethodKind::Exact, 0};
  if (text == "quadrature") return {MethodKind::Quadrature, 0};
  constexpr std::string_view ps = "point_source";
  if (text.substr(0, ps.size()) == ps) {
    auto rest = text.substr(ps.size());
    if (rest.empty()) return {MethodKind::PointSource, 1};
    if (rest.front() == ':') {
      const int m = parse_number<int>(trim(rest.substr(1)), "point-source m");
      if (m < 1) throw InvalidGeometry("point-source m must be >= 1");
      return {MethodKind::PointSource, m};
    }
  }
  throw InvalidGeometry("unknown method '" + std::string(text) +
                        "' (exact, point_source:<m>, quadrature)");
}

std::vector<Method> Method::parse_list(std::string_view comma_separated) {
  std::vector<Method> out;
  for (auto part : split(comma_separated, ',')) out.push_back(parse(part));
  return out;
}

Vec3 parse_vec3(std::string_view text) {
  const auto v = parse_doubles(text, 3, "point");
  return {v[0], v[1], v[2]};
}

PanelExtent parse_panel(std::string_view text) {
  const auto v = parse_doubles(text, 4, "panel x1,z1,x2,z2");
  const PanelExtent p{v[0], v[1], v[2], v[3]};
  if (!p.valid()) throw InvalidGeometry("panel needs x1 < x2 and z1 < z2");
  return p;
}

EvalOutput run_eval(const EvalOptions& o) {
  if (!o.panel.valid()) throw InvalidGeometry("invalid panel extent");
  EvalOutput out;
  out.method = o.method;
  switch (o.method.kind) {
    case MethodKind::Exact: {
      const Evaluation e = evaluate(o.panel, o.point);
      out.values = e.values;
      out.fy_defined = e.fy_defined;
      add_perturbation_flags(e.perturbed, out.flags);
      break;
    }
    case MethodKind::PointSource:
      out.values = point_source_influence(o.panel, {o.method.m}, o.point);
      break;
    case MethodKind::Quadrature: {
      const QuadratureSpec spec = recommended_spec(o.panel, o.point, o.rel_tol);
      const auto q = potential_quadrature(o.panel, o.point, spec);
      const auto f = force_quadrature(o.panel, o.point, spec);
      out.values = {q.phi, f.force.fx, f.force.fy, f.force.fz};
      if (!q.tolerance_met || !f.tolerance_met) {
        out.flags.emplace_back("tolerance_not_met");
      }
      break;
    }
  }
  if (!out.fy_defined) out.flags.emplace_back("fy_undefined");
  return out;
}

std::string format_eval(const EvalOutput& out) {
  std::string s = out.method.tag();
  s += " phi=" + csv::format(out.values.phi);
  s += " fx=" + csv::format(out.values.fx);
  s += " fy=" + (out.fy_defined ? csv::format(out.values.fy) : "undefined");
  s += " fz=" + csv::format(out.values.fz);
  if (!out.flags.empty()) s += " flags=" + join(out.flags, ';');
  return s;
}

ScanSpec line_scan(const Vec3& start, const Vec3& end, int samples,
                   std::vector<Method> methods) {
  if (samples < 2) throw InvalidGeometry("scan needs at least 2 samples");
  if (start == end) throw InvalidGeometry("scan start and end coincide");
  if (!start.allFinite() || !end.allFinite()) {
    throw InvalidGeometry("scan end points must be finite");
  }
  if (methods.empty()) throw InvalidGeometry("scan needs at least one method");
  ScanSpec spec;
  spec.methods = std::move(methods);
  spec.points.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    spec.points.push_back(k + 1 == samples ? end : start + t * (end - start));
  }
  return spec;
}

std::vector<Method> default_scan_methods() {
  return {{MethodKind::Exact, 0},
          {MethodKind::PointSource, 1},
          {MethodKind::PointSource, 10},
          {MethodKind::PointSource, 100}};
}

ScanSpec preset_scan(std::string_view name, int samples,
                     std::vector<Method> methods) {
  if (methods.empty()) methods = default_scan_methods();
  if (name == "diagonal") {
    auto s = line_scan(Vec3::Constant(-1.5), Vec3::Constant(1.5),
                       samples > 0 ? samples : 101, std::move(methods));
    s.name = "diagonal";
    return s;
  }
  if (name == "edge") {
    auto s = line_scan({-1.5, 1e-8, -0.5}, {1.5, 1e-8, -0.5},
                       samples > 0 ? samples : 101, std::move(methods));
    s.name = "edge";
    return s;
  }
  if (name == "surface") {
    const int n = samples > 0 ? samples : 41;
    if (n < 2) throw InvalidGeometry("surface grid needs at least 2 samples");
    ScanSpec s;
    s.name = "surface";
    s.methods = std::move(methods);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        s.points.emplace_back(-1.0 + 2.0 * i / (n - 1), 1e-8,
                              -1.0 + 2.0 * k / (n - 1));
      }
    }
    return s;
  }
  throw InvalidGeometry("unknown scan preset '" + std::string(name) +
                        "' (diagonal, edge, surface)");
}

std::vector<ScanRow> run_scan(const ScanSpec& spec, const PanelExtent& panel,
                              unsigned threads, double rel_tol) {
  if (!panel.valid()) throw InvalidGeometry("invalid panel extent");
  if (spec.methods.empty()) throw InvalidGeometry("scan needs a method");
  const std::size_t nm = spec.methods.size();
  std::vector<ScanRow> rows(spec.points.size() * nm);

  parallel_for(spec.points.size(), threads, [&](std::size_t i) {
    const Vec3& g = spec.points[i];
    const EvalPoint p{g.x(), g.y(), g.z()};

    std::optional<Evaluation> exact;
    std::string exact_failure;
    try {
      exact = evaluate(panel, p);
    } catch (const EdgeSingularity&) {
      exact_failure = "edge_singularity";
    }

    for (std::size_t j = 0; j < nm; ++j) {
      const Method& method = spec.methods[j];
      ScanRow& row = rows[i * nm + j];
      row.point = g;
      row.method = method.tag();

      std::optional<InfluenceValues> v;
      bool fy_defined = true;
      switch (method.kind) {
        case MethodKind::Exact:
          if (exact) {
            v = exact->values;
            fy_defined = exact->fy_defined;
            add_perturbation_flags(exact->perturbed, row.flags);
          } else {
            row.flags.push_back(exact_failure);
          }
          break;
        case MethodKind::PointSource:
          try {
            v = point_source_influence(panel, {method.m}, p);
          } catch (const CoincidentSource&) {
            row.flags.emplace_back("coincident_source");
          }
          break;
        case MethodKind::Quadrature:
          if (!(distance_to_panel(panel, p) > 0.0)) {
            row.flags.emplace_back("on_surface");
            break;
          }
          {
            const auto qs = recommended_spec(panel, p, rel_tol);
            const auto q = potential_quadrature(panel, p, qs);
            const auto f = force_quadrature(panel, p, qs);
            v = InfluenceValues{q.phi, f.force.fx, f.force.fy, f.force.fz};
            if (!q.tolerance_met || !f.tolerance_met) {
              row.flags.emplace_back("tolerance_not_met");
            }
          }
          break;
      }
      if (!v) continue;
      const bool finite = std::isfinite(v->phi) && std::isfinite(v->fx) &&
                          std::isfinite(v->fy) && std::isfinite(v->fz);
      if (!finite) {
        row.flags.emplace_back("non_finite");
        continue;
      }
      row.phi = v->phi;
      row.fx = v->fx;
      row.fz = v->fz;
      if (fy_defined) {
        row.fy = v->fy;
      } else {
        row.flags.emplace_back("fy_undefined");
      }

      if (!exact) continue;
      const auto ep = normalized_error(v->phi, exact->values.phi);
      row.err_phi = ep.value;
      if (ep.absolute) row.flags.emplace_back("err_phi_absolute");
      if (exact->fy_defined && fy_defined) {
        const auto ef = force_error(*v, exact->values);
        row.err_f = ef.value;
        if (ef.absolute) row.flags.emplace_back("err_f_absolute");
      }
    }
  });
  return rows;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  csv::Writer w(os);
  w.row({"x", "y", "z", "method", "phi", "fx", "fy", "fz", "err_phi", "err_f",
         "flags"});
  for (const ScanRow& r : rows) {
    w.row({csv::format(r.point.x()), csv::format(r.point.y()),
           csv::format(r.point.z()), r.method, field(r.phi), field(r.fx),
           field(r.fy), field(r.fz), field(r.err_phi), field(r.err_f),
           join(r.flags, ';')});
  }
}

ShapeTag parse_shape(std::string_view text) {
  text = trim(text);
  if (text == "plate") return ShapeTag::Plate;
  if (text == "cube") return ShapeTag::Cube;
  throw InvalidGeometry("unknown shape '" + std::string(text) +
                        "' (plate, cube)");
}

std::vector<int> parse_int_list(std::string_view comma_separated) {
  std::vector<int> out;
  for (auto part : split(comma_separated, ',')) {
    out.push_back(parse_number<int>(part, "element count"));
  }
  return out;
}

CapacitanceReport run_capacitance(const CapacitanceOptions& o) {
  if (o.n_list.empty()) throw InvalidGeometry("need at least one n");
  for (int n : o.n_list) {
    if (n < 1) throw InvalidGeometry("element count must be >= 1");
  }
  const GradingSpec grading = GradingSpec::from_ratio(o.grading);
  CapacitanceReport report;
  report.shape = o.shape;
  report.grading = o.grading;
  report.rows = convergence_study(
      o.shape, o.n_list, grading, o.threads,
      [&](int n, const Mesh& mesh, const Solution& s) {
        if (n != o.n_list.back()) return;
        report.mesh = mesh;
        report.solution = s;
      });
  return report;
}

nlohmann::json capacitance_json(const CapacitanceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ConvergenceRow& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"elements", row.elements},
                    {"capacitance", row.capacitance},
                    {"delta", row.delta},
                    {"solve_residual", row.solve_residual},
                    {"condition_estimate", row.condition_estimate}});
  }
  return {{"shape", to_string(r.shape)},
          {"grading_ratio", r.grading},
          {"rows", rows},
          {"final", solution_summary(r.mesh, r.rows.back().n, r.solution)}};
}

void print_convergence(std::ostream& os, const CapacitanceReport& r) {
  char line[160];
  std::snprintf(line, sizeof line, "%6s %9s %18s %12s %10s %10s\n", "n",
                "elements", "capacitance", "delta", "residual", "cond");
  os << line;
  for (const ConvergenceRow& row : r.rows) {
    std::snprintf(line, sizeof line, "%6d %9zu %18.12f %12.4e %10.2e %10.3e\n",
                  row.n, row.elements, row.capacitance, row.delta,
                  row.solve_residual, row.condition_estimate);
    os << line;
  }
}

}  // namespace panelfield::cli

// panelfield: evaluate the closed-form panel influence, run comparison scans
// and solve capacitance problems from the command line.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "panelfield/csv.hpp"
#include "panelfield/parallel.hpp"

namespace cli = panelfield::cli;

namespace {

// Reads --config files as JSON. Top-level keys are global options; an object
// named after a subcommand holds that subcommand's options. Arrays become
// comma-separated values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") +
                                 e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be an object");
    std::vector<CLI::ConfigItem> out;
    collect(j, {}, out);
    return out;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return panelfield::csv::format(v.get<double>());
    return v.dump();
  }

  static void collect(const nlohmann::json& obj,
                      const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        collect(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        std::string joined;
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (i) joined += ',';
          joined += scalar(value[i]);
        }
        item.inputs = {joined};
      } else {
        item.inputs = {scalar(value)};
      }
      out.push_back(std::move(item));
    }
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw std::ios_base::failure("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form panel influence, comparison scans and capacitance"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values (flags win)");
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (default: PANELFIELD_THREADS, then all cores)")
      ->check(CLI::NonNegativeNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "Influence of one panel at a point");
  std::string eval_panel = "-0.5,-0.5,0.5,0.5", eval_point, eval_method = "exact";
  int eval_m = 0;
  double eval_tol = 1e-10;
  eval->add_option("--panel", eval_panel, "x1,z1,x2,z2")->capture_default_str();
  eval->add_option("--point", eval_point, "X,Y,Z in panel coordinates")
      ->required();
  eval->add_option("--method", eval_method,
                   "exact | point_source[:m] | quadrature")
      ->capture_default_str();
  eval->add_option("--m", eval_m, "Point-source grid size (m x m)");
  eval->add_option("--rel-tol", eval_tol, "Quadrature relative tolerance")
      ->capture_default_str();

  // scan
  auto* scan = app.add_subcommand("scan", "Compare methods along a scan");
  std::string scan_preset, scan_start, scan_end, scan_methods, scan_output;
  std::string scan_panel = "-0.5,-0.5,0.5,0.5";
  int scan_samples = 0;
  double scan_tol = 1e-10;
  scan->add_option("--preset", scan_preset, "diagonal | edge | surface");
  scan->add_option("--start", scan_start, "X,Y,Z of a custom line scan");
  scan->add_option("--end", scan_end, "X,Y,Z of a custom line scan");
  scan->add_option("--samples", scan_samples,
                   "Samples (per side for surface; 0 = preset default)");
  scan->add_option("--methods", scan_methods,
                   "Comma list (default exact,point_source:1,:10,:100)");
  scan->add_option("--panel", scan_panel, "x1,z1,x2,z2")->capture_default_str();
  scan->add_option("--rel-tol", scan_tol, "Quadrature relative tolerance")
      ->capture_default_str();
  scan->add_option("--output,-o", scan_output, "CSV path (default stdout)");

  // capacitance
  auto* cap = app.add_subcommand("capacitance", "Solve for unit potential");
  std::string cap_shape = "plate", cap_n_list, cap_json, cap_csv;
  int cap_n = 0;
  double cap_grading = 1.0;
  cap->add_option("--shape", cap_shape, "plate | cube")->capture_default_str();
  cap->add_option("--n", cap_n, "Elements per side");
  cap->add_option("--n-list", cap_n_list, "Increasing list, e.g. 8,16,32");
  cap->add_option("--grading", cap_grading,
                  "Centre/edge cell size ratio (1 = uniform)")
      ->capture_default_str();
  cap->add_option("--json", cap_json, "Write the summary JSON here");
  cap->add_option("--csv", cap_csv, "Write densities of the finest mesh here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  try {
    const unsigned workers = panelfield::resolve_threads(threads);

    if (eval->parsed()) {
      cli::EvalOptions o;
      o.panel = cli::parse_panel(eval_panel);
      const auto p = cli::parse_vec3(eval_point);
      o.point = {p.x(), p.y(), p.z()};
      o.method = cli::Method::parse(eval_method);
      if (eval_m > 0) {
        if (o.method.kind != cli::MethodKind::PointSource) {
          throw panelfield::InvalidGeometry("--m applies to point_source only");
        }
        o.method.m = eval_m;
      }
      o.rel_tol = eval_tol;
      std::cout << cli::format_eval(cli::run_eval(o)) << '\n';
      return cli::kSuccess;
    }

    if (scan->parsed()) {
      const auto methods = scan_methods.empty()
                               ? std::vector<cli::Method>{}
                               : cli::Method::parse_list(scan_methods);
      cli::ScanSpec spec;
      if (!scan_preset.empty()) {
        if (!scan_start.empty() || !scan_end.empty()) {
          throw panelfield::InvalidGeometry(
              "--preset and --start/--end are exclusive");
        }
        spec = cli::preset_scan(scan_preset, scan_samples, methods);
      } else {
        if (scan_start.empty() || scan_end.empty()) {
          throw panelfield::InvalidGeometry(
              "scan needs --preset or both --start and --end");
        }
        spec = cli::line_scan(
            cli::parse_vec3(scan_start), cli::parse_vec3(scan_end),
            scan_samples > 0 ? scan_samples : 101,
            methods.empty() ? cli::default_scan_methods() : methods);
      }
      const auto rows = cli::run_scan(spec, cli::parse_panel(scan_panel),
                                      workers, scan_tol);
      std::ostringstream out;
      cli::write_scan_csv(out, rows);
      if (scan_output.empty()) {
        std::cout << out.str();
      } else {
        write_file(scan_output, out.str());
      }
      return cli::kSuccess;
    }

    if (cap->parsed()) {
      cli::CapacitanceOptions o;
      o.shape = cli::parse_shape(cap_shape);
      if (!cap_n_list.empty() && cap_n > 0) {
        throw panelfield::InvalidGeometry("--n and --n-list are exclusive");
      }
      if (!cap_n_list.empty()) {
        o.n_list = cli::parse_int_list(cap_n_list);
      } else if (cap_n > 0) {
        o.n_list = {cap_n};
      } else {
        throw panelfield::InvalidGeometry("capacitance needs --n or --n-list");
      }
      o.grading = cap_grading;
      o.threads = workers;
      panelfield::GradingSpec::from_ratio(o.grading);
      const auto report = cli::run_capacitance(o);
      cli::print_convergence(std::cout, report);
      if (!cap_json.empty()) {
        write_file(cap_json, cli::capacitance_json(report).dump(2) + "\n");
      }
      if (!cap_csv.empty()) {
        std::ostringstream out;
        panelfield::csv::write_densities(out, report.mesh, report.solution);
        write_file(cap_csv, out.str());
      }
      return cli::kSuccess;
    }
  } catch (const std::exception& e) {
    std::cerr << "panelfield: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kInputError;
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "panelfield/csv.hpp"
#include "panelfield/error.hpp"

namespace pf = panelfield;
namespace cli = panelfield::cli;
using pf::Vec3;

namespace {

const pf::PanelExtent kUnit{-0.5, -0.5, 0.5, 0.5};

int run(const std::string& args) {
  const std::string cmd =
      std::string(PANELFIELD_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + "panelfield_" + name;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string f;
  while (std::getline(s, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST(Method, ParsesTags) {
  EXPECT_EQ(cli::Method::parse("exact").kind, cli::MethodKind::Exact);
  EXPECT_EQ(cli::Method::parse("quadrature").kind, cli::MethodKind::Quadrature);
  const auto ps = cli::Method::parse("point_source:10");
  EXPECT_EQ(ps.kind, cli::MethodKind::PointSource);
  EXPECT_EQ(ps.m, 10);
  EXPECT_EQ(ps.tag(), "point_source:10");
  EXPECT_EQ(cli::Method::parse("point_source").m, 1);
  EXPECT_EQ(cli::Method::parse_list("exact, point_source:100").size(), 2u);
  EXPECT_THROW(cli::Method::parse("point_source:0"), pf::InvalidGeometry);
  EXPECT_THROW(cli::Method::parse("point_source:x"), pf::InvalidGeometry);
  EXPECT_THROW(cli::Method::parse("gauss"), pf::InvalidGeometry);
}

TEST(Parse, PointsAndPanels) {
  EXPECT_EQ(cli::parse_vec3("0, 1e6,-2.5"), Vec3(0, 1e6, -2.5));
  EXPECT_THROW(cli::parse_vec3("1,2"), pf::InvalidGeometry);
  EXPECT_THROW(cli::parse_vec3("1,2,nan"), pf::InvalidGeometry);
  EXPECT_THROW(cli::parse_vec3("1,2,3x"), pf::InvalidGeometry);
  EXPECT_THROW(cli::parse_panel("0,0,0,1"), pf::InvalidGeometry);
  EXPECT_EQ(cli::parse_int_list("8,16,32"), (std::vector<int>{8, 16, 32}));
  EXPECT_EQ(cli::parse_shape("cube"), pf::ShapeTag::Cube);
  EXPECT_THROW(cli::parse_shape("sphere"), pf::InvalidGeometry);
}

TEST(Eval, CentroidPotential) {
  cli::EvalOptions o;
  o.point = {0, 0, 0};
  const auto out = cli::run_eval(o);
  EXPECT_NEAR(out.values.phi, 3.5254943480781721, 1e-15);
  EXPECT_FALSE(out.fy_defined);
  const std::string line = cli::format_eval(out);
  EXPECT_EQ(line.rfind("exact phi=3.52549434807817", 0), 0u) << line;
  EXPECT_NE(line.find("fy=undefined"), std::string::npos);
  EXPECT_NE(line.find("in_plane"), std::string::npos);
}

TEST(Eval, FarFieldAndMethods) {
  cli::EvalOptions o;
  o.point = {0, 1e6, 0};
  EXPECT_NEAR(cli::run_eval(o).values.phi, 1e-6, 1e-18);
  o.point = {0.3, 0.4, -0.2};
  const double exact = cli::run_eval(o).values.phi;
  o.method = cli::Method::parse("quadrature");
  EXPECT_NEAR(cli::run_eval(o).values.phi, exact, 1e-9 * exact);
  o.method = cli::Method::parse("point_source:100");
  EXPECT_NEAR(cli::run_eval(o).values.phi, exact, 1e-3 * exact);
}

TEST(Eval, CornerRaisesEdgeSingularity) {
  cli::EvalOptions o;
  o.point = {0.5, 0, 0.5};
  try {
    cli::run_eval(o);
    FAIL() << "expected EdgeSingularity";
  } catch (const pf::EdgeSingularity& e) {
    EXPECT_EQ(cli::exit_code_for(e), cli::kInputError);
  }
  EXPECT_EQ(cli::exit_code_for(pf::SingularMatrix("x")),
            cli::kNumericalFailure);
  EXPECT_EQ(cli::exit_code_for(pf::InvalidGrading("x")), cli::kInputError);
}

TEST(Scan, Presets) {
  const auto d = cli::preset_scan("diagonal", 0, {});
  ASSERT_EQ(d.points.size(), 101u);
  EXPECT_EQ(d.points.front(), Vec3::Constant(-1.5));
  EXPECT_EQ(d.points.back(), Vec3::Constant(1.5));
  EXPECT_EQ(d.points[50], Vec3::Zero());
  EXPECT_EQ(d.methods.size(), 4u);
  const auto e = cli::preset_scan("edge", 11, cli::Method::parse_list("exact"));
  ASSERT_EQ(e.points.size(), 11u);
  for (const Vec3& p : e.points) {
    EXPECT_EQ(p.y(), 1e-8);
    EXPECT_EQ(p.z(), -0.5);
  }
  const auto s = cli::preset_scan("surface", 0, {});
  EXPECT_EQ(s.points.size(), 41u * 41u);
  EXPECT_THROW(cli::preset_scan("spiral", 0, {}), pf::InvalidGeometry);
  EXPECT_THROW(cli::line_scan(Vec3::Zero(), Vec3::Ones(), 1, {{}}),
               pf::InvalidGeometry);
  EXPECT_THROW(cli::line_scan(Vec3::Ones(), Vec3::Ones(), 5, {{}}),
               pf::InvalidGeometry);
}

TEST(Scan, DiagonalRowsAndFlags) {
  const auto spec = cli::preset_scan("diagonal", 0, {});
  const auto rows = cli::run_scan(spec, kUnit, 2);
  ASSERT_EQ(rows.size(), 404u);
  // Centroid: exact potential defined, Fy undefined; the single point source
  // sits on the evaluation point.
  const auto& exact = rows[50 * 4];
  EXPECT_EQ(exact.method, "exact");
  EXPECT_NEAR(*exact.phi, 4 * std::log1p(std::sqrt(2.0)), 1e-15);
  EXPECT_FALSE(exact.fy);
  const auto& one = rows[50 * 4 + 1];
  EXPECT_FALSE(one.phi);
  EXPECT_EQ(one.flags, std::vector<std::string>{"coincident_source"});
  for (const auto& r : rows) {
    if (r.phi) {
      EXPECT_TRUE(std::isfinite(*r.phi));
    }
    if (r.method == "exact" && r.err_phi) {
      EXPECT_EQ(*r.err_phi, 0.0);
    }
  }
  // Far corner: point sources approach the exact value as m grows.
  EXPECT_GT(std::abs(*rows[1].err_phi), std::abs(*rows[2].err_phi));
  EXPECT_GT(std::abs(*rows[2].err_phi), std::abs(*rows[3].err_phi));
}

TEST(Scan, CsvIsWellFormedAndThreadIndependent) {
  const auto spec = cli::preset_scan("edge", 0, {});
  std::ostringstream a, b;
  cli::write_scan_csv(a, cli::run_scan(spec, kUnit, 1));
  cli::write_scan_csv(b, cli::run_scan(spec, kUnit, 4));
  EXPECT_EQ(a.str(), b.str());

  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,z,method,phi,fx,fy,fz,err_phi,err_f,flags");
  int records = 0;
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    ASSERT_EQ(f.size(), 11u) << line;
    for (int c : {0, 1, 2, 4, 5, 6, 7, 8, 9}) {
      if (f[c].empty()) continue;
      const double v = std::stod(f[c]);
      EXPECT_TRUE(std::isfinite(v)) << line;
      EXPECT_EQ(pf::csv::format(v), f[c]);
    }
    ++records;
  }
  EXPECT_EQ(records, 404);
}

TEST(Capacitance, SinglePanelPlate) {
  cli::CapacitanceOptions o;
  o.n_list = {1};
  const auto r = cli::run_capacitance(o);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(r.rows[0].capacitance, 1 / (4 * std::log1p(std::sqrt(2.0))),
              1e-15);
  const auto j = cli::capacitance_json(r);
  EXPECT_EQ(j["shape"], "plate");
  EXPECT_EQ(j["final"]["elements"], 1);
  EXPECT_EQ(j["rows"].size(), 1u);
}

TEST(Capacitance, StudyKeepsFinestSolution) {
  cli::CapacitanceOptions o;
  o.shape = pf::ShapeTag::Cube;
  o.n_list = {1, 2, 3};
  o.grading = 2;
  const auto r = cli::run_capacitance(o);
  EXPECT_EQ(r.mesh.size(), 54u);
  EXPECT_EQ(r.solution.capacitance, r.rows.back().capacitance);
  std::ostringstream table;
  cli::print_convergence(table, r);
  EXPECT_NE(table.str().find("capacitance"), std::string::npos);
  o.grading = 0.5;
  EXPECT_THROW(cli::run_capacitance(o), pf::InvalidGrading);
}

TEST(Executable, ExitCodes) {
  EXPECT_EQ(run("eval --point 0,0,0 --method exact"), 0);
  EXPECT_EQ(run("eval --point 0,1e6,0"), 0);
  EXPECT_EQ(run("eval --point 0.5,0,0.5 --method exact"), 2);
  EXPECT_EQ(run("eval --point 0,0,0 --method point_source --m 1"), 2);
  EXPECT_EQ(run("eval --point 0,0,0 --method bogus"), 2);
  EXPECT_EQ(run("eval"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("scan --preset diagonal --samples 1"), 2);
  EXPECT_EQ(run("scan --start 0,1,0 --end 0,1,0"), 2);
  EXPECT_EQ(run("capacitance --shape plate --n 1 --grading 0.5"), 2);
  EXPECT_EQ(run("capacitance --shape torus --n 1"), 2);
}

TEST(Executable, ConfigFileWithFlagOverride) {
  const std::string cfg = temp_path("config.json");
  const std::string json_a = temp_path("cap_a.json");
  const std::string json_b = temp_path("cap_b.json");
  {
    std::ofstream f(cfg);
    f << R"({"threads": 2, "capacitance": {"shape": "cube", "n-list": [1, 2],)"
      << R"( "grading": 2, "json": ")" << json_a << R"("}})";
  }
  ASSERT_EQ(run("--config " + cfg + " capacitance"), 0);
  const auto a = nlohmann::json::parse(slurp(json_a));
  EXPECT_EQ(a["shape"], "cube");
  EXPECT_EQ(a["grading_ratio"], 2.0);
  EXPECT_EQ(a["rows"].size(), 2u);

  ASSERT_EQ(run("--config " + cfg + " capacitance --shape plate --json " +
                json_b),
            0);
  const auto b = nlohmann::json::parse(slurp(json_b));
  EXPECT_EQ(b["shape"], "plate");
  EXPECT_EQ(b["rows"].size(), 2u);

  {
    std::ofstream f(cfg);
    f << "{not json";
  }
  EXPECT_EQ(run("--config " + cfg + " capacitance --n 1"), 2);
}

TEST(Executable, WritesDensityCsv) {
  const std::string csv = temp_path("densities.csv");
  ASSERT_EQ(run("capacitance --shape plate --n 2 --csv " + csv), 0);
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "panel,cx,cy,cz,area,density");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

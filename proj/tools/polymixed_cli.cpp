#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "polymixed/study.hpp"

using namespace polymixed;

namespace {

constexpr int kExitChecks = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run(const StudyConfig& config) {
  const StudyResult study = run_study(config);
  const std::string table = emit_table(study.records(), config.format, config.diagnostics);
  if (config.out.empty()) {
    std::cout << table;
  } else {
    std::ofstream out(config.out);
    if (!out) throw ConfigError("cannot open '" + config.out + "'");
    out << table;
  }
  if (!config.dump_mesh.empty()) mesh_write(make_grid(config.grid, config.level_max), config.dump_mesh);
  if (!config.checks) return 0;

  std::vector<CheckResult> checks = property_checks(config.grid, config.k, std::min(config.level_max, 3));
  for (auto& c : solution_checks(study)) checks.push_back(std::move(c));
  const int top = config.grid == GridFamily::wedge ? 2 : 3;
  const std::vector<double> beta = inf_sup_trend(config.grid, config.k, top);
  const double spread = relative_spread(beta);
  checks.push_back({"inf-sup spread levels 1-" + std::to_string(top), spread < 0.05, spread, 0.05});
  const double low = *std::min_element(beta.begin(), beta.end());
  checks.push_back({"inf-sup lower bound", low > 0.05, low, 0.05});
  std::cerr << format_checks(checks);
  for (const auto& c : checks)
    if (!c.passed) return kExitChecks;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element convergence studies on polytopal grids"};
  StudyConfig config;
  std::string grid = "quad", levels = "1..3", format = "markdown";
  app.add_option("--grid", grid, "quad | quadhex | wedge")->capture_default_str();
  app.add_option("--k", config.k, "polynomial order 0..3")->capture_default_str();
  app.add_option("--levels", levels, "inclusive level range a..b")->capture_default_str();
  app.add_option("--case", config.case_name, "trig2d | poly3d (default from grid) | constant | linear");
  app.add_option("--format", format, "markdown | csv")->capture_default_str();
  app.add_option("--out", config.out, "output path (default stdout)");
  app.add_flag("--checks", config.checks, "run the invariant suite, nonzero exit on violation");
  app.add_flag("--diagnostics", config.diagnostics, "add h, dof counts, div part and time columns");
  app.add_option("--dump-mesh", config.dump_mesh, "write the finest mesh in polymesh text format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    config.grid = parse_grid_family(grid);
    config.format = parse_table_format(format);
    std::tie(config.level_min, config.level_max) = parse_level_range(levels);
    validate(config);
    default_quad_degree(config.k);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    return run(config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

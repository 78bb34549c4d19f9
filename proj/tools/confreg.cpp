// confreg: confidence regions for combinations of excursion sets.
//
//   confreg analyze  --stack a.json --stack b.json --c 2 --out results/
//   confreg simulate --scenario circles --snr high --sep 20 --n 300 --out report.json
//   confreg render   --upper upper.csv --point point.csv --lower lower.csv --out overlay.png

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "confreg/app.hpp"
#include "confreg/errors.hpp"
#include "confreg/simharness.hpp"

namespace {

using confreg::ConfigurationError;
namespace app = confreg::app;
namespace sim = confreg::sim;

struct AnalyzeFlags {
  std::string config;
  std::vector<std::string> stacks, designs, contrasts;
  std::vector<double> thresholds;
  std::vector<int> signs;
  std::string mode;
  double alpha = 0.05;
  std::size_t boot = 5000;
  std::uint64_t seed = 0;
  double eta = 0.0;
  std::string out;
  unsigned workers = 1;
  bool dump_boot = false;
};

struct SimulateFlags {
  std::string scenario = "circles", snr = "high";
  std::vector<double> separations{20.0};
  std::vector<double> gradients{1.0};
  std::vector<std::size_t> ns{300};
  double rho = 0.0;
  std::size_t conditions = 2;
  std::size_t instances = 500;
  std::size_t boot = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  std::size_t size = 100;
  double radius = 25.0;
  double fwhm = 5.0;
  double eta = 0.0;
  bool naive = false;
  std::string out, csv;
};

// Broadcasts a single value to every condition, otherwise requires one per
// condition.
template <class T>
std::vector<T> per_condition(const std::vector<T>& values, std::size_t m, const char* flag) {
  if (values.size() == 1) return std::vector<T>(m, values.front());
  if (values.size() != m) {
    throw ConfigurationError(std::string(flag) + ": expected 1 or " + std::to_string(m) + " values, got " +
                             std::to_string(values.size()));
  }
  return values;
}

app::AnalyzeConfig build_analyze_config(const AnalyzeFlags& f, const CLI::App& cmd) {
  app::AnalyzeConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigurationError("config: cannot read " + f.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigurationError("config: " + f.config + ": " + e.what());
    }
    cfg = app::AnalyzeConfig::from_json(j);
  }
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };

  if (given("--stack")) {
    std::vector<app::ConditionInput> conditions(f.stacks.size());
    for (std::size_t i = 0; i < conditions.size(); ++i) {
      conditions[i].stack = f.stacks[i];
      if (i < cfg.conditions.size()) {
        conditions[i].design = cfg.conditions[i].design;
        conditions[i].contrast = cfg.conditions[i].contrast;
        conditions[i].threshold = cfg.conditions[i].threshold;
        conditions[i].sign = cfg.conditions[i].sign;
      }
    }
    cfg.conditions = std::move(conditions);
  }
  const std::size_t m = cfg.conditions.size();
  if (m == 0) throw ConfigurationError("--stack: at least one stack is required");
  if (given("--design")) {
    const auto v = per_condition(f.designs, m, "--design");
    for (std::size_t i = 0; i < m; ++i) cfg.conditions[i].design = v[i];
  }
  if (given("--contrast")) {
    const auto v = per_condition(f.contrasts, m, "--contrast");
    for (std::size_t i = 0; i < m; ++i) cfg.conditions[i].contrast = v[i];
  }
  if (given("--c")) {
    const auto v = per_condition(f.thresholds, m, "--c");
    for (std::size_t i = 0; i < m; ++i) cfg.conditions[i].threshold = v[i];
  } else if (f.config.empty()) {
    throw ConfigurationError("--c: a threshold is required");
  }
  if (given("--sign")) {
    const auto v = per_condition(f.signs, m, "--sign");
    for (std::size_t i = 0; i < m; ++i) cfg.conditions[i].sign = v[i];
  }
  if (given("--mode")) cfg.mode = confreg::parse_combine_mode(f.mode);
  if (given("--alpha")) cfg.alpha = f.alpha;
  if (given("--boot")) cfg.boot = f.boot;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--eta")) cfg.eta = f.eta;
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--workers")) cfg.workers = f.workers;
  if (given("--dump-boot")) cfg.dump_boot = f.dump_boot;
  return cfg;
}

int run_analyze(const AnalyzeFlags& f, const CLI::App& cmd) {
  const app::AnalyzeConfig cfg = build_analyze_config(f, cmd);
  const app::AnalyzeResult result = app::analyze(cfg);
  const auto& r = result.report;
  std::cout << "a = " << r["a"].get<double>() << " (alpha " << cfg.alpha << ", " << cfg.boot << " realizations, "
            << r["boundary_points"].get<std::size_t>() << " boundary points)\n"
            << r["labels"]["upper"].get<std::string>() << ": " << r["pixel_counts"]["upper"] << " px, "
            << r["labels"]["point"].get<std::string>() << ": " << r["pixel_counts"]["point"] << " px, "
            << r["labels"]["lower"].get<std::string>() << ": " << r["pixel_counts"]["lower"] << " px\n"
            << "wrote " << (cfg.out_dir / "report.json").string() << " in " << result.seconds << " s\n";
  return 0;
}

int run_simulate(const SimulateFlags& f) {
  sim::SimulationSpec base;
  base.scenario = sim::parse_scenario(f.scenario);
  base.snr = sim::parse_snr(f.snr);
  base.noise_rho = f.rho;
  base.conditions = f.conditions;
  base.instances = f.instances;
  base.boot = {f.boot, f.alpha, 0, 1};
  base.seed = f.seed;
  base.workers = f.workers;
  base.image_size = f.size;
  base.shape_radius = f.radius;
  base.fwhm = f.fwhm;
  if (f.eta > 0.0) base.eta = f.eta;

  const bool ramps = base.scenario == sim::Scenario::ramps;
  const std::vector<double>& geometry = ramps ? f.gradients : f.separations;

  std::vector<sim::CoverageReport> reports;
  nlohmann::json out = {{"reports", nlohmann::json::array()}};
  for (std::size_t n : f.ns) {
    for (double g : geometry) {
      sim::SimulationSpec spec = base;
      spec.n = n;
      (ramps ? spec.gradient_multiplier : spec.separation) = g;
      for (const auto& w : spec.extrapolation_warnings()) std::cerr << "warning: " << w << '\n';
      reports.push_back(sim::run_coverage(spec));
      if (f.naive) reports.push_back(sim::naive_comparison(spec));
    }
  }
  for (const auto& r : reports) {
    out["reports"].push_back(sim::report_to_json(r));
    std::cout << sim::to_string(r.spec.scenario) << " snr=" << sim::to_string(r.spec.snr) << " n=" << r.spec.n
              << (ramps ? " k=" : " sep=") << (ramps ? r.spec.gradient_multiplier : r.spec.separation) << " "
              << sim::to_string(r.method) << ": coverage " << r.coverage << " [" << r.ci_low << ", " << r.ci_high
              << "] over " << r.valid << " instances (" << r.empty << " empty), mean a " << r.mean_a << ", "
              << r.seconds_per_instance << " s/instance\n";
  }
  if (!f.out.empty()) {
    std::ofstream os(f.out);
    if (!os) throw confreg::Error("cannot open " + f.out + " for writing");
    os << out.dump(2) << '\n';
  }
  if (!f.csv.empty()) sim::write_coverage_csv(f.csv, reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Simultaneous confidence regions for intersections and unions of excursion sets"};
  cli.require_subcommand(1);

  AnalyzeFlags af;
  auto* analyze = cli.add_subcommand("analyze",
                                     "Fit per-pixel linear models and compute confidence regions.\n"
                                     "Stacks use a JSON header (width, height, n, dtype f64, order row-major,\n"
                                     "endianness little) with the float64 payload in a sibling .bin file.\n"
                                     "Outputs upper/point/lower masks as PNG (0/255) and CSV (row,col,value),\n"
                                     "overlay.png, boundary.csv, report.json and runtime.json.");
  analyze->add_option("--config", af.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  analyze->add_option("--stack", af.stacks, "Stack header per condition (repeat for each condition)");
  analyze->add_option("--design", af.designs, "Design matrix CSV (n rows) per condition; default intercept-only");
  analyze->add_option("--contrast", af.contrasts, "Contrast vector CSV per condition; default [1]");
  analyze->add_option("--c", af.thresholds, "Threshold per condition (one value is broadcast)");
  analyze->add_option("--sign", af.signs, "Sign per condition: +1 for mu >= c, -1 for mu <= c");
  analyze->add_option("--mode", af.mode, "conjunction (intersection) or disjunction (union)");
  analyze->add_option("--alpha", af.alpha, "Tolerance level")->capture_default_str();
  analyze->add_option("--boot", af.boot, "Bootstrap realizations")->capture_default_str();
  analyze->add_option("--seed", af.seed, "Bootstrap seed")->capture_default_str();
  analyze->add_option("--eta", af.eta, "Active-set tolerance (default 2/sqrt(n))");
  analyze->add_option("--out", af.out, "Output directory");
  analyze->add_option("--workers", af.workers, "Bootstrap threads (0 = all cores)")->capture_default_str();
  analyze->add_flag("--dump-boot", af.dump_boot, "Write the bootstrap sample to h_tilde.csv");

  SimulateFlags sf;
  auto* simulate = cli.add_subcommand("simulate", "Monte Carlo coverage of synthetic circle/square/ramp signals");
  simulate->add_option("--scenario", sf.scenario, "circles, squares or ramps")->capture_default_str();
  simulate->add_option("--snr", sf.snr, "low (c = 1/2) or high (c = 2)")->capture_default_str();
  simulate->add_option("--sep", sf.separations, "Shape-centre separation(s) in pixels")->capture_default_str();
  simulate->add_option("--k", sf.gradients, "Ramp gradient multiplier(s)")->capture_default_str();
  simulate->add_option("--n", sf.ns, "Observation count(s)")->capture_default_str();
  simulate->add_option("--rho", sf.rho, "Between-condition noise correlation")->capture_default_str();
  simulate->add_option("--M", sf.conditions, "Condition count")->capture_default_str();
  simulate->add_option("--instances", sf.instances, "Simulation instances")->capture_default_str();
  simulate->add_option("--boot", sf.boot, "Bootstrap realizations")->capture_default_str();
  simulate->add_option("--alpha", sf.alpha, "Tolerance level")->capture_default_str();
  simulate->add_option("--seed", sf.seed, "Master seed")->capture_default_str();
  simulate->add_option("--workers", sf.workers, "Threads (0 = all cores)")->capture_default_str();
  simulate->add_option("--size", sf.size, "Image side length in pixels")->capture_default_str();
  simulate->add_option("--radius", sf.radius, "Circle radius / square half-width")->capture_default_str();
  simulate->add_option("--fwhm", sf.fwhm, "Smoothing FWHM in pixels")->capture_default_str();
  simulate->add_option("--eta", sf.eta, "Active-set tolerance (default 2/sqrt(n))");
  simulate->add_flag("--naive", sf.naive, "Also report the naive intersection of single-condition regions");
  simulate->add_option("--out", sf.out, "JSON report path");
  simulate->add_option("--csv", sf.csv, "CSV with one row per grid point and method");

  app::RenderConfig rf;
  auto* render = cli.add_subcommand("render", "Overlay upper/point/lower mask CSVs into one PNG");
  render->add_option("--upper", rf.upper, "Upper mask CSV")->required()->check(CLI::ExistingFile);
  render->add_option("--point", rf.point, "Point-estimate mask CSV")->required()->check(CLI::ExistingFile);
  render->add_option("--lower", rf.lower, "Lower mask CSV")->required()->check(CLI::ExistingFile);
  render->add_option("--out", rf.out, "Output PNG")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed()) return run_analyze(af, *analyze);
    if (simulate->parsed()) return run_simulate(sf);
    app::render(rf);
    std::cout << "wrote " << rf.out.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::exit_code_for(e);
  }
}

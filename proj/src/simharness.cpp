#include "confreg/simharness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "confreg/errors.hpp"
#include "confreg/excursion.hpp"
#include "confreg/glm.hpp"
#include "confreg/parallel.hpp"
#include "confreg/regions.hpp"
#include "confreg/rng.hpp"

namespace confreg::sim {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::circles: return "circles";
    case Scenario::squares: return "squares";
    case Scenario::ramps: return "ramps";
  }
  return "unknown";
}

std::string_view to_string(Snr s) { return s == Snr::high ? "high" : "low"; }

std::string_view to_string(Method m) { return m == Method::proposed ? "proposed" : "naive"; }

Scenario parse_scenario(std::string_view text) {
  if (text == "circles") return Scenario::circles;
  if (text == "squares") return Scenario::squares;
  if (text == "ramps") return Scenario::ramps;
  throw ConfigurationError("unknown scenario '" + std::string(text) + "' (expected circles, squares or ramps)");
}

Snr parse_snr(std::string_view text) {
  if (text == "high") return Snr::high;
  if (text == "low") return Snr::low;
  throw ConfigurationError("unknown SNR regime '" + std::string(text) + "' (expected low or high)");
}

void SimulationSpec::validate() const {
  if (n < 2) throw ConfigurationError("simulation needs n >= 2");
  if (conditions < 1 || conditions > 64) throw ConfigurationError("condition count must be in [1, 64]");
  if (instances == 0) throw ConfigurationError("instances must be positive");
  if (image_size < 2) throw ConfigurationError("image size must be at least 2");
  if (!(shape_radius > 0.0)) throw ConfigurationError("shape radius must be positive");
  if (!(fwhm > 0.0)) throw ConfigurationError("smoothing FWHM must be positive");
  if (!(separation >= 0.0)) throw ConfigurationError("separation must be nonnegative");
  if (!(gradient_multiplier > 0.0)) throw ConfigurationError("ramp gradient multiplier must be positive");
  if (!(noise_rho >= -1.0 && noise_rho <= 1.0)) throw ConfigurationError("noise correlation must lie in [-1, 1]");
  if (conditions > 2 && noise_rho < -1.0 / static_cast<double>(conditions - 1)) {
    throw ConfigurationError("equicorrelation " + std::to_string(noise_rho) + " is infeasible for " +
                             std::to_string(conditions) + " conditions");
  }
  if (eta && !(*eta > 0.0)) throw ConfigurationError("eta must be positive");
  try {
    boot.validate();
  } catch (const InvalidParameterError& e) {
    throw ConfigurationError(e.what());
  }
}

std::vector<std::string> SimulationSpec::extrapolation_warnings() const {
  std::vector<std::string> out;
  if (scenario != Scenario::ramps && separation > 50.0) out.push_back("separation outside the published [0, 50] grid");
  if (scenario == Scenario::ramps && (gradient_multiplier < 0.25 || gradient_multiplier > 1.75)) {
    out.push_back("gradient multiplier outside the published [0.25, 1.75] grid");
  }
  if (conditions != 2) out.push_back("published scenarios use two conditions");
  return out;
}

std::vector<ScalarField> generate_signal(const SimulationSpec& spec) {
  spec.validate();
  const Lattice lattice(spec.image_size, spec.image_size);
  const double centre = (static_cast<double>(spec.image_size) - 1.0) / 2.0;
  const std::size_t m = spec.conditions;
  std::vector<ScalarField> out;
  out.reserve(m);

  if (spec.scenario == Scenario::ramps) {
    const double slope = spec.gradient_multiplier * (spec.snr == Snr::high ? 8.0 : 2.0) / 50.0;
    for (std::size_t i = 0; i < m; ++i) {
      // Condition 1 rises along columns, the last along rows.
      const double theta = m == 1 ? 0.0 : static_cast<double>(i) * (std::numbers::pi / 2.0) / static_cast<double>(m - 1);
      const double cx = std::cos(theta), cy = std::sin(theta);
      ScalarField f(lattice);
      for (std::size_t r = 0; r < spec.image_size; ++r) {
        for (std::size_t c = 0; c < spec.image_size; ++c) {
          const double proj = (static_cast<double>(c) - centre) * cx + (static_cast<double>(r) - centre) * cy;
          f.at(r, c) = spec.threshold() + slope * proj;
        }
      }
      out.push_back(std::move(f));
    }
    return out;
  }

  const double amplitude = spec.snr == Snr::high ? 3.0 : 3.0 / 4.0;
  const double radius = spec.shape_radius;
  for (std::size_t i = 0; i < m; ++i) {
    // Shape centres sit evenly on a circle of diameter `separation`; for two
    // conditions that is left/right of the image centre.
    double cx = centre, cy = centre;
    if (m > 1) {
      const double theta = std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
      cx += 0.5 * spec.separation * std::cos(theta);
      cy += 0.5 * spec.separation * std::sin(theta);
      if (std::abs(cy - centre) < 1e-12) cy = centre;
    }
    ScalarField shape(lattice);
    for (std::size_t r = 0; r < spec.image_size; ++r) {
      for (std::size_t c = 0; c < spec.image_size; ++c) {
        const double dx = static_cast<double>(c) - cx;
        const double dy = static_cast<double>(r) - cy;
        const bool in = spec.scenario == Scenario::circles ? dx * dx + dy * dy <= radius * radius
                                                           : std::abs(dx) <= radius && std::abs(dy) <= radius;
        shape.at(r, c) = in ? amplitude : 0.0;
      }
    }
    out.push_back(gaussian_smooth(shape, spec.fwhm));
  }
  return out;
}

std::vector<FieldStack> generate_noise(const SimulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Lattice lattice(spec.image_size, spec.image_size);
  const std::size_t m = spec.conditions;
  const double rho = spec.noise_rho;
  // Symmetric square root of the equicorrelation matrix (1-rho) I + rho 11'.
  const double md = static_cast<double>(m);
  const double own = std::sqrt(1.0 - rho);
  const double shared = m == 1 ? 0.0 : (std::sqrt(std::max(0.0, 1.0 + (md - 1.0) * rho)) - own) / md;

  std::vector<FieldStack> out(m, FieldStack(lattice, spec.n));
  std::mt19937_64 engine(seed);
  boost::random::normal_distribution<double> normal;
  std::vector<double> z(m);
  const std::size_t pixels = lattice.size();
  for (std::size_t l = 0; l < spec.n; ++l) {
    for (std::size_t s = 0; s < pixels; ++s) {
      double total = 0.0;
      for (auto& v : z) {
        v = normal(engine);
        total += v;
      }
      if (m == 1) {
        out[0](l, s) = z[0];
      } else {
        for (std::size_t i = 0; i < m; ++i) out[i](l, s) = own * z[i] + shared * total;
      }
    }
  }
  return out;
}

std::uint64_t instance_seed(std::uint64_t master, std::size_t index) { return rng::derive_seed(master, index); }

namespace {

struct Prepared {
  std::vector<ScalarField> mu;
  TruthSpec truth;
  ScalarField true_min;
};

Prepared prepare(const SimulationSpec& spec) {
  spec.validate();
  std::vector<ScalarField> mu = generate_signal(spec);
  TruthSpec truth{mu, {}, CombineSpec::conjunction(std::vector<double>(spec.conditions, spec.threshold()))};
  ScalarField true_min = true_working_min(truth);
  return Prepared{std::move(mu), std::move(truth), std::move(true_min)};
}

InstanceOutcome run_prepared(const SimulationSpec& spec, const Prepared& prep, std::size_t index,
                             std::span<const double> alphas, Method method, unsigned boot_workers) {
  if (alphas.empty()) throw ConfigurationError("at least one alpha is required");
  const std::uint64_t seed = instance_seed(spec.seed, index);
  std::vector<FieldStack> data = generate_noise(spec, seed);
  const auto design = glm::DesignSpec::intercept_only(spec.n);
  std::vector<glm::GlmFit> fits;
  fits.reserve(spec.conditions);
  for (std::size_t i = 0; i < spec.conditions; ++i) {
    auto values = data[i].values();
    const auto mu = prep.mu[i].values();
    const std::size_t pixels = mu.size();
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += mu[k % pixels];
    fits.push_back(glm::fit(data[i], design));
    data[i] = FieldStack(data[i].lattice(), 0);  // release the raw observations
  }
  std::vector<FieldStack> residuals;
  residuals.reserve(fits.size());
  for (auto& f : fits) residuals.push_back(std::move(f.residuals));

  InstanceOutcome out;
  out.a.resize(alphas.size());
  out.covered.resize(alphas.size());
  const CombineSpec& combine = prep.truth.spec;

  if (method == Method::proposed) {
    const StandardizedFields fields = standardize(fits, combine);
    const double eta = spec.eta.value_or(default_eta(fields.tau_n));
    BoundarySegmentation seg;
    try {
      seg = segment_boundary(fields, eta);
    } catch (const EmptyEstimateError&) {
      out.empty_estimate = true;
      return out;
    }
    out.boundary_points = seg.points.size();
    bootstrap::BootstrapConfig cfg = spec.boot;
    cfg.seed = rng::derive_seed(seed, 1);
    cfg.workers = boot_workers;
    const auto signs = combine.effective_signs();
    const bootstrap::QuantileResult q = bootstrap::bootstrap_quantile(residuals, seg, signs, cfg);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const double a = bootstrap::empirical_quantile(q.h_tilde, alphas[k]).a;
      const ConfidenceRegions regions = threshold_regions(fields, a, combine, alphas[k]);
      out.nested = out.nested && regions.nested();
      out.a[k] = a;
      out.covered[k] = check_inclusion(prep.truth, regions, fields, a);
    }
    return out;
  }

  // Naive: calibrate each condition on its own boundary, then intersect.
  const std::size_t m = spec.conditions;
  std::vector<ScalarField> stats;
  std::vector<std::vector<double>> samples;
  for (std::size_t i = 0; i < m; ++i) {
    const CombineSpec single = CombineSpec::conjunction({combine.thresholds[i]});
    const StandardizedFields fields = standardize(std::span<const glm::GlmFit>(&fits[i], 1), single);
    const double eta = spec.eta.value_or(default_eta(fields.tau_n));
    BoundarySegmentation seg;
    try {
      seg = segment_boundary(fields, eta);
    } catch (const EmptyEstimateError&) {
      out.empty_estimate = true;
      return out;
    }
    out.boundary_points += seg.points.size();
    bootstrap::BootstrapConfig cfg = spec.boot;
    cfg.seed = rng::derive_seed(seed, 1 + i);
    cfg.workers = boot_workers;
    const int sign = 1;
    samples.push_back(bootstrap::bootstrap_quantile(std::span<const FieldStack>(&residuals[i], 1), seg,
                                                    std::span<const int>(&sign, 1), cfg)
                          .h_tilde);
    ScalarField t(fields.lattice());
    for (std::size_t s = 0; s < t.size(); ++s) t[s] = fields.m_hat[s] / fields.tau_n;
    stats.push_back(std::move(t));
  }
  const Lattice& lattice = stats.front().lattice();
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    std::vector<double> thresholds(m);
    Mask upper(lattice, true), lower(lattice, true);
    for (std::size_t i = 0; i < m; ++i) {
      thresholds[i] = bootstrap::empirical_quantile(samples[i], alphas[k]).a;
      for (std::size_t s = 0; s < lattice.size(); ++s) {
        if (!(stats[i][s] >= thresholds[i])) upper.set(s, false);
        if (!(stats[i][s] >= -thresholds[i])) lower.set(s, false);
      }
    }
    double mean = 0.0;
    for (double t : thresholds) mean += t;
    out.a[k] = mean / static_cast<double>(m);
    out.nested = out.nested && upper.subset_of(lower);
    out.covered[k] = check_working_inclusion(prep.true_min, upper, lower, stats, thresholds);
  }
  return out;
}

CoverageReport run_loop(const SimulationSpec& spec, Method method) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const Prepared prep = prepare(spec);
  const double alpha = spec.boot.alpha;
  std::vector<InstanceOutcome> outcomes(spec.instances);
  const unsigned workers = resolve_workers(spec.workers);
  if (spec.instances >= workers) {
    parallel_for(spec.instances, workers, [&](std::size_t i) {
      outcomes[i] = run_prepared(spec, prep, i, std::span<const double>(&alpha, 1), method, 1);
    });
  } else {
    for (std::size_t i = 0; i < spec.instances; ++i) {
      outcomes[i] = run_prepared(spec, prep, i, std::span<const double>(&alpha, 1), method, workers);
    }
  }

  CoverageReport report;
  report.spec = spec;
  report.method = method;
  report.instances = spec.instances;
  double sum_a = 0.0;
  for (const InstanceOutcome& o : outcomes) {
    if (o.empty_estimate) {
      ++report.empty;
      continue;
    }
    ++report.valid;
    if (o.covered[0]) ++report.covered;
    if (!o.nested) ++report.nesting_violations;
    sum_a += o.a[0];
  }
  if (report.valid > 0) {
    report.coverage = static_cast<double>(report.covered) / static_cast<double>(report.valid);
    std::tie(report.ci_low, report.ci_high) = binomial_interval(report.covered, report.valid);
    report.mean_a = sum_a / static_cast<double>(report.valid);
  } else {
    report.coverage = report.ci_low = report.ci_high = report.mean_a = std::numeric_limits<double>::quiet_NaN();
  }
  report.seconds_total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.seconds_per_instance = report.seconds_total / static_cast<double>(spec.instances);
  return report;
}

}  // namespace

InstanceOutcome run_instance(const SimulationSpec& spec, std::size_t index, std::span<const double> alphas,
                             Method method, unsigned boot_workers) {
  const Prepared prep = prepare(spec);
  return run_prepared(spec, prep, index, alphas, method, boot_workers);
}

std::pair<double, double> binomial_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw InvalidParameterError("binomial interval needs at least one trial");
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  const double half = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return {std::clamp(p - half, 0.0, 1.0), std::clamp(p + half, 0.0, 1.0)};
}

CoverageReport run_coverage(const SimulationSpec& spec) { return run_loop(spec, Method::proposed); }

CoverageReport naive_comparison(const SimulationSpec& spec) { return run_loop(spec, Method::naive); }

nlohmann::json spec_to_json(const SimulationSpec& spec) {
  nlohmann::json j = {{"scenario", to_string(spec.scenario)},
                      {"snr", to_string(spec.snr)},
                      {"threshold", spec.threshold()},
                      {"n", spec.n},
                      {"conditions", spec.conditions},
                      {"noise_rho", spec.noise_rho},
                      {"instances", spec.instances},
                      {"boot", spec.boot.realizations},
                      {"alpha", spec.boot.alpha},
                      {"seed", spec.seed},
                      {"image_size", spec.image_size},
                      {"shape_radius", spec.shape_radius},
                      {"fwhm", spec.fwhm}};
  if (spec.scenario == Scenario::ramps) {
    j["gradient_multiplier"] = spec.gradient_multiplier;
  } else {
    j["separation"] = spec.separation;
  }
  if (spec.eta) j["eta"] = *spec.eta;
  return j;
}

nlohmann::json report_to_json(const CoverageReport& r, bool include_timing) {
  nlohmann::json j = {{"spec", spec_to_json(r.spec)},
                      {"method", to_string(r.method)},
                      {"instances", r.instances},
                      {"valid", r.valid},
                      {"empty_estimate", r.empty},
                      {"covered", r.covered},
                      {"coverage", r.coverage},
                      {"ci_low", r.ci_low},
                      {"ci_high", r.ci_high},
                      {"mean_a", r.mean_a},
                      {"nesting_violations", r.nesting_violations}};
  const auto warnings = r.spec.extrapolation_warnings();
  if (!warnings.empty()) j["warnings"] = warnings;
  if (include_timing) {
    j["runtime"] = {{"seconds_total", r.seconds_total}, {"seconds_per_instance", r.seconds_per_instance}};
  }
  return j;
}

void write_coverage_csv(const std::filesystem::path& path, std::span<const CoverageReport> reports) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(10);
  out << "scenario,snr,n,geometry,noise_rho,method,instances,valid,covered,coverage,ci_low,ci_high,mean_a\n";
  for (const auto& r : reports) {
    const double geometry = r.spec.scenario == Scenario::ramps ? r.spec.gradient_multiplier : r.spec.separation;
    out << to_string(r.spec.scenario) << ',' << to_string(r.spec.snr) << ',' << r.spec.n << ',' << geometry << ','
        << r.spec.noise_rho << ',' << to_string(r.method) << ',' << r.instances << ',' << r.valid << ',' << r.covered
        << ',' << r.coverage << ',' << r.ci_low << ',' << r.ci_high << ',' << r.mean_a << '\n';
  }
}

}  // namespace confreg::sim

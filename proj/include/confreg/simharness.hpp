#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "confreg/bootstrap.hpp"
#include "confreg/field.hpp"

namespace confreg::sim {

enum class Scenario { circles, squares, ramps };
enum class Snr { low, high };

std::string_view to_string(Scenario s);
std::string_view to_string(Snr s);
Scenario parse_scenario(std::string_view text);
Snr parse_snr(std::string_view text);

/// Synthetic coverage experiment. Two shapes (or ramps) on a square image,
/// observed n times with unit-variance Gaussian noise per condition.
struct SimulationSpec {
  Scenario scenario = Scenario::circles;
  Snr snr = Snr::high;
  std::size_t n = 300;
  std::size_t conditions = 2;
  double separation = 20.0;          ///< shape-centre distance in pixels
  double gradient_multiplier = 1.0;  ///< ramp slope factor k
  double noise_rho = 0.0;            ///< between-condition noise correlation
  std::size_t instances = 500;
  bootstrap::BootstrapConfig boot{1000, 0.05, 42, 1};
  std::uint64_t seed = 42;     ///< master seed for noise and bootstrap substreams
  unsigned workers = 1;        ///< 0 = hardware concurrency
  std::size_t image_size = 100;
  double shape_radius = 25.0;  ///< circle radius / square half-width
  double fwhm = 5.0;
  std::optional<double> eta;   ///< active-set tolerance, default 2 tau_n

  /// Excursion threshold paired with the SNR regime: 2 (high) or 1/2 (low).
  double threshold() const noexcept { return snr == Snr::high ? 2.0 : 0.5; }

  /// Throws ConfigurationError for unusable settings.
  void validate() const;

  /// Human-readable notes for settings outside the published grids.
  std::vector<std::string> extrapolation_warnings() const;
};

/// Noise-free target functions, one per condition.
std::vector<ScalarField> generate_signal(const SimulationSpec& spec);

/// Unit-variance Gaussian noise stacks with pairwise correlation noise_rho
/// between conditions (equicorrelated), independent across observations
/// and pixels. Throws ConfigurationError if noise_rho < -1/(M-1).
std::vector<FieldStack> generate_noise(const SimulationSpec& spec, std::uint64_t instance_seed);

/// Seed of instance `index` derived from the master seed.
std::uint64_t instance_seed(std::uint64_t master, std::size_t index);

enum class Method { proposed, naive };
std::string_view to_string(Method m);

struct InstanceOutcome {
  bool empty_estimate = false;
  std::size_t boundary_points = 0;
  bool nested = true;
  std::vector<double> a;        ///< per requested alpha (proposed: the single threshold)
  std::vector<bool> covered;    ///< per requested alpha
};

/// One simulation instance evaluated at each alpha from a single bootstrap
/// sample. Under Method::naive, `a` holds the mean of the per-condition
/// thresholds.
InstanceOutcome run_instance(const SimulationSpec& spec, std::size_t index, std::span<const double> alphas,
                             Method method = Method::proposed, unsigned boot_workers = 1);

struct CoverageReport {
  SimulationSpec spec;
  Method method = Method::proposed;
  std::size_t instances = 0;
  std::size_t valid = 0;  ///< instances with a nonempty boundary estimate
  std::size_t empty = 0;
  std::size_t covered = 0;
  std::size_t nesting_violations = 0;
  double coverage = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_a = 0.0;
  double seconds_total = 0.0;
  double seconds_per_instance = 0.0;
};

/// Normal-approximation 95% interval p ± 1.96 sqrt(p(1-p)/trials), clipped to
/// [0, 1].
std::pair<double, double> binomial_interval(std::size_t successes, std::size_t trials);

CoverageReport run_coverage(const SimulationSpec& spec);
/// Same loop, intersecting independently calibrated single-condition regions.
CoverageReport naive_comparison(const SimulationSpec& spec);

nlohmann::json spec_to_json(const SimulationSpec& spec);
/// `include_timing` controls the runtime fields so that reports can be
/// compared byte for byte.
nlohmann::json report_to_json(const CoverageReport& report, bool include_timing = true);
void write_coverage_csv(const std::filesystem::path& path, std::span<const CoverageReport> reports);

}  // namespace confreg::sim

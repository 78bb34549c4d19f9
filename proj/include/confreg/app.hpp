#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "confreg/bootstrap.hpp"
#include "confreg/excursion.hpp"
#include "confreg/regions.hpp"

namespace confreg::app {

/// One study condition of an analysis. Without a design the model is
/// intercept-only; without a contrast it is [1].
struct ConditionInput {
  std::filesystem::path stack;
  std::optional<std::filesystem::path> design;
  std::optional<std::filesystem::path> contrast;
  double threshold = 0.0;
  int sign = 1;
};

struct AnalyzeConfig {
  std::vector<ConditionInput> conditions;
  CombineMode mode = CombineMode::conjunction;
  double alpha = 0.05;
  std::size_t boot = 5000;
  std::uint64_t seed = 0;
  std::optional<double> eta;
  std::filesystem::path out_dir = ".";
  unsigned workers = 1;
  bool dump_boot = false;

  /// Reads the JSON config layout documented in the README. Unknown keys are
  /// rejected.
  static AnalyzeConfig from_json(const nlohmann::json& j);

  /// Throws ConfigurationError naming the offending field.
  void validate() const;
};

struct AnalyzeResult {
  nlohmann::json report;  ///< deterministic; written to report.json
  double seconds = 0.0;   ///< written to runtime.json
  ConfidenceRegions regions;
  bootstrap::QuantileResult quantile;
  BoundarySegmentation segmentation;
};

/// Full pipeline: load stacks, fit, standardize, segment, bootstrap, threshold.
/// Writes upper/point/lower masks (PNG + CSV), overlay.png, boundary.csv,
/// report.json, runtime.json and, when requested, h_tilde.csv into out_dir.
AnalyzeResult analyze(const AnalyzeConfig& cfg);

struct RenderConfig {
  std::filesystem::path upper, point, lower, out;
};

/// Reads three mask CSVs and writes the tri-region overlay PNG.
void render(const RenderConfig& cfg);

/// Process exit status for an exception escaping a subcommand: 3 for an empty
/// boundary estimate, 2 for any other library or validation error, 1 otherwise.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace confreg::app

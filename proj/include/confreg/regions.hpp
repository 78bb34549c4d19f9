#pragma once

#include <array>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "confreg/excursion.hpp"
#include "confreg/field.hpp"

namespace confreg {

/// Nested pixel sets upper ⊆ point ⊆ lower. Under disjunction these are the
/// union-set regions obtained by complementing the working-field regions.
struct ConfidenceRegions {
  Mask upper;
  Mask point;
  Mask lower;
  double a = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  CombineMode mode = CombineMode::conjunction;
  std::vector<int> signs;

  bool nested() const { return upper.subset_of(point) && point.subset_of(lower); }
};

/// Display names of (upper, point, lower): F̂⁺/F̂/F̂⁻ or Ĝ⁺/Ĝ/Ĝ⁻.
std::array<std::string_view, 3> region_labels(CombineMode mode);

/// Thresholds m_hat / tau_n at +a, 0 and -a. For disjunction the working
/// fields are already negated, so the three masks are complemented and
/// upper/lower swap roles. Throws InvalidParameterError for a < 0.
ConfidenceRegions threshold_regions(const StandardizedFields& fields, double a, const CombineSpec& spec,
                                    double alpha = std::numeric_limits<double>::quiet_NaN());

/// Noise-free target functions for simulation checks. `sigma` may be empty
/// (unit standard deviation everywhere).
struct TruthSpec {
  std::vector<ScalarField> mu;
  std::vector<ScalarField> sigma;
  CombineSpec spec;
};

/// min_i e_i (mu_i - c_i) / sigma_i, whose nonnegative set is the true
/// combined set in working orientation. Throws ConfigurationError if the
/// truth does not match the CombineSpec or lattice.
ScalarField true_working_min(const TruthSpec& truth);

/// True iff the working-orientation regions bracket the true set: pixel
/// nesting upper ⊆ truth ⊆ lower, and at every interpolated crossing of the
/// true boundary each statistic k satisfies stat_k >= -a_k, while at least one
/// satisfies stat_k < a_k. With a single statistic this reads -a <= stat < a.
bool check_working_inclusion(const ScalarField& true_min, const Mask& working_upper, const Mask& working_lower,
                             std::span<const ScalarField> statistics, std::span<const double> thresholds);

/// Coverage check of regions produced by threshold_regions from `fields` at
/// threshold a, against the noise-free truth.
bool check_inclusion(const TruthSpec& truth, const ConfidenceRegions& regions, const StandardizedFields& fields,
                     double a);

}  // namespace confreg

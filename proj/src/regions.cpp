#include "confreg/regions.hpp"

#include <algorithm>
#include <string>

#include "confreg/errors.hpp"

namespace confreg {

std::array<std::string_view, 3> region_labels(CombineMode mode) {
  if (mode == CombineMode::conjunction) return {"F̂⁺", "F̂", "F̂⁻"};
  return {"Ĝ⁺", "Ĝ", "Ĝ⁻"};
}

ConfidenceRegions threshold_regions(const StandardizedFields& fields, double a, const CombineSpec& spec,
                                    double alpha) {
  if (!(a >= 0.0)) throw InvalidParameterError("region threshold a must be nonnegative");
  const Lattice& lattice = fields.lattice();
  Mask upper(lattice), point(lattice), lower(lattice);
  const double inv_tau = 1.0 / fields.tau_n;
  for (std::size_t s = 0; s < lattice.size(); ++s) {
    const double m = fields.m_hat[s];
    const double t = m * inv_tau;
    upper.set(s, t >= a);
    point.set(s, m >= 0.0);
    lower.set(s, t >= -a);
  }
  ConfidenceRegions out{std::move(upper), std::move(point), std::move(lower), a, alpha, spec.mode, spec.signs};
  if (spec.mode == CombineMode::disjunction) {
    // Pixel-lattice closure of a complement is the complement itself.
    Mask new_upper = out.lower.complement();
    Mask new_lower = out.upper.complement();
    out.point = out.point.complement();
    out.upper = std::move(new_upper);
    out.lower = std::move(new_lower);
  }
  return out;
}

ScalarField true_working_min(const TruthSpec& truth) {
  truth.spec.validate();
  const std::size_t m = truth.spec.conditions();
  if (truth.mu.size() != m) {
    throw ConfigurationError("truth has " + std::to_string(truth.mu.size()) + " fields for " + std::to_string(m) +
                             " conditions");
  }
  if (!truth.sigma.empty() && truth.sigma.size() != m) throw ConfigurationError("truth sigma count mismatch");
  const Lattice& lattice = truth.mu.front().lattice();
  ScalarField out(lattice, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    if (!(truth.mu[i].lattice() == lattice)) throw ConfigurationError("truth fields must share a lattice");
    if (!truth.sigma.empty() && !(truth.sigma[i].lattice() == lattice)) throw ConfigurationError("truth sigma lattice mismatch");
    const auto e = static_cast<double>(truth.spec.effective_sign(i));
    for (std::size_t s = 0; s < lattice.size(); ++s) {
      const double sd = truth.sigma.empty() ? 1.0 : truth.sigma[i][s];
      if (!(sd > 0.0)) throw ConfigurationError("truth sigma must be positive");
      out[s] = std::min(out[s], e * (truth.mu[i][s] - truth.spec.thresholds[i]) / sd);
    }
  }
  return out;
}

bool check_working_inclusion(const ScalarField& true_min, const Mask& working_upper, const Mask& working_lower,
                             std::span<const ScalarField> statistics, std::span<const double> thresholds) {
  const Lattice& lattice = true_min.lattice();
  if (!(working_upper.lattice() == lattice) || !(working_lower.lattice() == lattice)) {
    throw ConfigurationError("truth and region lattices differ");
  }
  if (statistics.empty() || statistics.size() != thresholds.size()) {
    throw ConfigurationError("need one threshold per statistic");
  }
  for (const auto& st : statistics) {
    if (!(st.lattice() == lattice)) throw ConfigurationError("statistic lattice differs from truth");
  }

  for (std::size_t s = 0; s < lattice.size(); ++s) {
    const bool inside = true_min[s] >= 0.0;
    if (inside && !working_lower[s]) return false;
    if (working_upper[s] && !inside) return false;
  }

  for (const EdgeCrossing& e : find_crossings(true_min)) {
    bool all_above_lower = true;
    bool all_above_upper = true;
    for (std::size_t k = 0; k < statistics.size(); ++k) {
      const double v = (1.0 - e.w) * statistics[k][e.first] + e.w * statistics[k][e.second];
      if (!(v >= -thresholds[k])) all_above_lower = false;
      if (!(v >= thresholds[k])) all_above_upper = false;
    }
    if (!all_above_lower || all_above_upper) return false;
  }
  return true;
}

bool check_inclusion(const TruthSpec& truth, const ConfidenceRegions& regions, const StandardizedFields& fields,
                     double a) {
  const ScalarField true_min = true_working_min(truth);
  if (truth.spec.mode != regions.mode) throw ConfigurationError("truth and regions use different combine modes");
  const bool disj = regions.mode == CombineMode::disjunction;
  const Mask working_upper = disj ? regions.lower.complement() : regions.upper;
  const Mask working_lower = disj ? regions.upper.complement() : regions.lower;

  ScalarField stat(fields.lattice());
  for (std::size_t s = 0; s < stat.size(); ++s) stat[s] = fields.m_hat[s] / fields.tau_n;
  const double thresholds[] = {a};
  return check_working_inclusion(true_min, working_upper, working_lower, std::span<const ScalarField>(&stat, 1),
                                 thresholds);
}

}  // namespace confreg

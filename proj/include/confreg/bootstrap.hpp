#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "confreg/excursion.hpp"
#include "confreg/field.hpp"

namespace confreg::bootstrap {

struct BootstrapConfig {
  std::size_t realizations = 5000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned workers = 1;  ///< 0 = hardware concurrency

  /// Throws InvalidParameterError for realizations == 0 or alpha outside (0,1).
  void validate() const;
};

struct QuantileResult {
  double a;                     ///< calibrated threshold on the t scale
  std::vector<double> h_tilde;  ///< bootstrap maxima, indexed by realization
  std::size_t index;            ///< 1-based order statistic used for a
};

/// 1-based order statistic ceil((1 - alpha) * B), clamped to [1, B].
std::size_t quantile_index(double alpha, std::size_t realizations);

/// Order-statistic quantile of a bootstrap sample. h_tilde is kept in
/// realization order.
QuantileResult empirical_quantile(std::vector<double> h_tilde, double alpha);

/// Standardized residuals at the pixels on either side of each boundary
/// point, arranged for evaluating many bootstrap realizations at once. The
/// bootstrap t-field is formed at those pixels and linearly interpolated to
/// the boundary points, matching how the observed statistic is interpolated.
class BoundaryResiduals {
 public:
  BoundaryResiduals(std::span<const FieldStack> residuals, const BoundarySegmentation& seg,
                    std::span<const int> effective_signs);

  std::size_t n() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  std::size_t points() const noexcept { return active_.size(); }
  std::size_t conditions() const noexcept { return signs_.size(); }

  /// Bootstrap maximum for one set of multipliers (length n). `realization`
  /// only labels a DegenerateBootstrapError.
  double statistic(std::span<const double> multipliers, std::size_t realization = 0) const;

  /// Bootstrap maxima for realizations [first, first + out.size()) of `seed`.
  void statistics(std::uint64_t seed, std::size_t first, std::span<double> out) const;

 private:
  void pixel_statistics(const double* sums, double* g) const;
  double reduce(const double* g, std::size_t realization) const;

  // Row k * M + i holds condition i's n residuals at the k-th distinct pixel.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values_;
  Eigen::VectorXd sum_squares_;
  std::vector<std::size_t> first_, second_;  ///< row offsets of each point's endpoints
  std::vector<double> weights_;
  std::vector<ConditionSet> active_;
  std::vector<int> signs_;
};

/// Wild t-bootstrap estimate of the (1 - alpha) quantile of the boundary
/// maximum. Multipliers are shared across conditions within a realization.
/// The returned sample is bit-identical for any worker count.
QuantileResult bootstrap_quantile(std::span<const FieldStack> residuals, const BoundarySegmentation& seg,
                                  std::span<const int> effective_signs, const BootstrapConfig& cfg);

/// Writes realization,h_tilde rows.
void write_h_tilde_csv(const std::filesystem::path& path, std::span<const double> h_tilde);

}  // namespace confreg::bootstrap

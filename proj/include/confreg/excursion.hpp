#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "confreg/field.hpp"
#include "confreg/glm.hpp"

namespace confreg {

enum class CombineMode { conjunction, disjunction };

std::string_view to_string(CombineMode mode);
/// Throws ConfigurationError for anything other than "conjunction" or
/// "disjunction".
CombineMode parse_combine_mode(std::string_view text);

/// How M per-condition excursion sets are combined. Condition i asks for
/// mu_i >= c_i when sign_i = +1 and mu_i <= c_i when sign_i = -1; conjunction
/// intersects these sets, disjunction takes their union.
struct CombineSpec {
  std::vector<double> thresholds;
  std::vector<int> signs;
  CombineMode mode = CombineMode::conjunction;

  std::size_t conditions() const noexcept { return thresholds.size(); }

  /// Sign applied to condition i's field before taking the pixelwise min:
  /// sign_i for conjunction, -sign_i for disjunction (inner complement of
  /// the union).
  int effective_sign(std::size_t i) const;
  std::vector<int> effective_signs() const;

  /// Throws ConfigurationError on length mismatch, empty spec, signs outside
  /// {-1,+1}, non-finite thresholds or more than 64 conditions.
  void validate() const;

  static CombineSpec conjunction(std::vector<double> thresholds);
};

/// Working fields g_i and their pixelwise minimum. The statistic thresholded
/// for confidence regions is m_hat / tau_n.
struct StandardizedFields {
  std::vector<ScalarField> g_hat;
  ScalarField m_hat;
  double tau_n;
  std::vector<int> effective_signs;

  std::size_t conditions() const noexcept { return g_hat.size(); }
  const Lattice& lattice() const noexcept { return m_hat.lattice(); }

  /// Builds m_hat = min_i g_i. Signs default to +1.
  static StandardizedFields from_working_fields(std::vector<ScalarField> g, double tau_n,
                                                std::vector<int> effective_signs = {});
};

/// Working field i is e_i (mu_hat_i - c_i) / sigma_i with e_i the effective
/// sign and sigma_i = se_i / tau_n, so m_hat / tau_n is the smallest signed
/// t-statistic. Throws ConfigurationError if fits disagree on lattice or n.
StandardizedFields standardize(std::span<const glm::GlmFit> fits, const CombineSpec& spec);

/// Zero crossing of a field along one 4-neighbour lattice edge. The point lies
/// at (1 - w) * first + w * second with first < second.
struct EdgeCrossing {
  std::size_t first;
  std::size_t second;
  double w;

  friend auto operator<=>(const EdgeCrossing&, const EdgeCrossing&) = default;
};

/// Every sign change of `f` along horizontal and vertical lattice edges with
/// its linearly interpolated location, plus one point (w = 0 or 1) per pixel
/// that is exactly zero. Sorted by (first, second, w).
std::vector<EdgeCrossing> find_crossings(const ScalarField& f);

using ConditionSet = std::uint64_t;  ///< bit i set <=> condition i+1 active

struct BoundaryPoint {
  EdgeCrossing edge;
  ConditionSet active_set;
};

struct BoundarySegmentation {
  std::vector<BoundaryPoint> points;
  double eta;
};

/// Default tolerance for assigning active conditions: two standard errors on
/// the working-field scale.
double default_eta(double tau_n);

/// Boundary points of {m_hat >= 0} with the conditions whose interpolated
/// working field lies within eta of zero. The argmin condition is always
/// active. Throws EmptyEstimateError when m_hat never changes sign.
BoundarySegmentation segment_boundary(const StandardizedFields& fields, double eta);

/// Columns: first_row, first_col, second_row, second_col, w, active_mask.
void write_boundary_csv(const std::filesystem::path& path, const BoundarySegmentation& seg, const Lattice& lattice);

}  // namespace confreg

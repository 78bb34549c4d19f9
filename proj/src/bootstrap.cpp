#include "confreg/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "confreg/errors.hpp"
#include "confreg/parallel.hpp"
#include "confreg/rng.hpp"

namespace confreg::bootstrap {

namespace {

// Realizations are evaluated in fixed-size blocks so the arithmetic for a
// given realization never depends on how blocks are spread over threads.
constexpr std::size_t kBlock = 64;

}  // namespace

void BootstrapConfig::validate() const {
  if (realizations == 0) throw InvalidParameterError("bootstrap realization count must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameterError("alpha must lie in (0, 1)");
}

std::size_t quantile_index(double alpha, std::size_t realizations) {
  if (realizations == 0) throw InvalidParameterError("empty bootstrap sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameterError("alpha must lie in (0, 1)");
  // The 1e-9 slack absorbs representation error in (1 - alpha) * B, e.g. 0.95 * 100.
  const double x = (1.0 - alpha) * static_cast<double>(realizations);
  const auto idx = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return std::clamp<std::size_t>(idx, 1, realizations);
}

QuantileResult empirical_quantile(std::vector<double> h_tilde, double alpha) {
  const std::size_t index = quantile_index(alpha, h_tilde.size());
  std::vector<double> sorted = h_tilde;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(index - 1), sorted.end());
  return QuantileResult{sorted[index - 1], std::move(h_tilde), index};
}

BoundaryResiduals::BoundaryResiduals(std::span<const FieldStack> residuals, const BoundarySegmentation& seg,
                                     std::span<const int> effective_signs)
    : signs_(effective_signs.begin(), effective_signs.end()) {
  if (seg.points.empty()) throw EmptyEstimateError();
  if (residuals.empty() || residuals.size() != signs_.size()) {
    throw ConfigurationError("need one residual stack and one sign per condition");
  }
  const std::size_t n = residuals.front().n();
  const Lattice& lattice = residuals.front().lattice();
  for (const auto& r : residuals) {
    if (r.n() != n || !(r.lattice() == lattice)) throw ConfigurationError("residual stacks must share n and lattice");
  }
  if (n < 2) throw ConfigurationError("bootstrap needs n >= 2");

  const std::size_t m = residuals.size();
  const std::size_t points = seg.points.size();
  std::vector<std::size_t> pixels;
  pixels.reserve(2 * points);
  for (const BoundaryPoint& bp : seg.points) {
    if (bp.edge.first >= lattice.size() || bp.edge.second >= lattice.size()) {
      throw ConfigurationError("boundary point outside the residual lattice");
    }
    pixels.push_back(bp.edge.first);
    pixels.push_back(bp.edge.second);
  }
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  const auto slot = [&](std::size_t pixel) {
    return static_cast<std::size_t>(std::lower_bound(pixels.begin(), pixels.end(), pixel) - pixels.begin());
  };

  values_.resize(static_cast<Eigen::Index>(pixels.size() * m), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      auto row = values_.row(static_cast<Eigen::Index>(k * m + i));
      for (std::size_t l = 0; l < n; ++l) row[static_cast<Eigen::Index>(l)] = residuals[i](l, pixels[k]);
    }
  }
  sum_squares_ = values_.rowwise().squaredNorm();

  first_.reserve(points);
  second_.reserve(points);
  weights_.reserve(points);
  active_.reserve(points);
  for (const BoundaryPoint& bp : seg.points) {
    first_.push_back(slot(bp.edge.first) * m);
    second_.push_back(slot(bp.edge.second) * m);
    weights_.push_back(bp.edge.w);
    active_.push_back(bp.active_set);
  }
}

void BoundaryResiduals::pixel_statistics(const double* sums, double* g) const {
  const double nd = static_cast<double>(n());
  const double inv_sqrt_n = 1.0 / std::sqrt(nd);
  constexpr double kTiny = 64.0 * std::numeric_limits<double>::epsilon();
  for (Eigen::Index row = 0; row < values_.rows(); ++row) {
    // Multipliers are +-1, so the bootstrap sample's sum of squares is the
    // residuals' sum of squares.
    const double s = sums[row];
    const double ss = sum_squares_[row];
    const double var = (ss - s * s / nd) / (nd - 1.0);
    g[row] = var > kTiny * ss / (nd - 1.0) ? inv_sqrt_n * s / std::sqrt(var)
                                           : std::numeric_limits<double>::quiet_NaN();
  }
}

double BoundaryResiduals::reduce(const double* g, std::size_t realization) const {
  const std::size_t m = conditions();
  double h = 0.0;
  for (std::size_t p = 0; p < points(); ++p) {
    const double w = weights_[p];
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (!((active_[p] >> i) & 1u)) continue;
      double v = 0.0;
      if (w < 1.0) v += (1.0 - w) * g[first_[p] + i];
      if (w > 0.0) v += w * g[second_[p] + i];
      if (std::isnan(v)) throw DegenerateBootstrapError(realization, p);
      lowest = std::min(lowest, signs_[i] * v);
    }
    h = std::max(h, std::abs(lowest));
  }
  return h;
}

double BoundaryResiduals::statistic(std::span<const double> multipliers, std::size_t realization) const {
  if (multipliers.size() != n()) throw InvalidParameterError("need one multiplier per observation");
  const Eigen::Map<const Eigen::VectorXd> r(multipliers.data(), static_cast<Eigen::Index>(multipliers.size()));
  const Eigen::VectorXd sums = values_ * r;
  std::vector<double> g(static_cast<std::size_t>(values_.rows()));
  pixel_statistics(sums.data(), g.data());
  return reduce(g.data(), realization);
}

void BoundaryResiduals::statistics(std::uint64_t seed, std::size_t first, std::span<double> out) const {
  const auto nn = static_cast<Eigen::Index>(n());
  Eigen::MatrixXd multipliers(nn, static_cast<Eigen::Index>(out.size()));
  for (std::size_t k = 0; k < out.size(); ++k) {
    rng::rademacher_stream(seed, first + k, std::span<double>(multipliers.col(static_cast<Eigen::Index>(k)).data(), n()));
  }
  const Eigen::MatrixXd sums = values_ * multipliers;
  std::vector<double> g(static_cast<std::size_t>(values_.rows()));
  for (std::size_t k = 0; k < out.size(); ++k) {
    pixel_statistics(sums.col(static_cast<Eigen::Index>(k)).data(), g.data());
    out[k] = reduce(g.data(), first + k);
  }
}

QuantileResult bootstrap_quantile(std::span<const FieldStack> residuals, const BoundarySegmentation& seg,
                                  std::span<const int> effective_signs, const BootstrapConfig& cfg) {
  cfg.validate();
  const BoundaryResiduals prepared(residuals, seg, effective_signs);
  std::vector<double> h(cfg.realizations);
  const std::size_t blocks = (cfg.realizations + kBlock - 1) / kBlock;
  parallel_for(blocks, cfg.workers, [&](std::size_t block) {
    const std::size_t first = block * kBlock;
    const std::size_t count = std::min(kBlock, cfg.realizations - first);
    prepared.statistics(cfg.seed, first, std::span<double>(h).subspan(first, count));
  });
  return empirical_quantile(std::move(h), cfg.alpha);
}

void write_h_tilde_csv(const std::filesystem::path& path, std::span<const double> h_tilde) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "realization,h_tilde\n";
  for (std::size_t b = 0; b < h_tilde.size(); ++b) out << b << ',' << h_tilde[b] << '\n';
}

}  // namespace confreg::bootstrap

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "confreg/bootstrap.hpp"
#include "confreg/errors.hpp"
#include "confreg/rng.hpp"
#include "reference.hpp"
#include "test_util.hpp"

using namespace confreg;

namespace {

// Noisy data on a small lattice with a planted bump, fitted and segmented the
// same way as the analysis pipeline.
struct Fixture {
  Lattice lat;
  std::size_t n;
  std::vector<glm::GlmFit> fits;
  std::vector<int> effective;
  StandardizedFields fields;
  BoundarySegmentation seg;
  std::vector<FieldStack> residuals;

  Fixture(std::size_t width, std::size_t n_obs, std::size_t m, std::uint64_t seed, CombineMode mode = CombineMode::conjunction,
          std::vector<int> signs = {})
      : lat(width, width), n(n_obs), fields(make(width, n_obs, m, seed, mode, signs)), seg(segment_boundary(fields, 2.0 * fields.tau_n)) {
    for (auto& f : fits) residuals.push_back(f.residuals);
  }

  StandardizedFields make(std::size_t width, std::size_t n_obs, std::size_t m, std::uint64_t seed, CombineMode mode,
                          std::vector<int>& signs) {
    const Lattice l(width, width);
    if (signs.empty()) signs.assign(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
      auto values = testutil::normal_values(n_obs * l.size(), seed + i);
      for (std::size_t obs = 0; obs < n_obs; ++obs) {
        for (std::size_t s = 0; s < l.size(); ++s) {
          const double dr = static_cast<double>(l.row_of(s)) - width / 2.0;
          const double dc = static_cast<double>(l.col_of(s)) - width / 2.0 + static_cast<double>(i);
          values[obs * l.size() + s] += signs[i] * 3.0 * std::exp(-(dr * dr + dc * dc) / (width * 0.8));
        }
      }
      fits.push_back(glm::fit(FieldStack(l, n_obs, values), glm::DesignSpec::intercept_only(n_obs)));
    }
    std::vector<double> thresholds;
    for (int d : signs) thresholds.push_back(d);
    CombineSpec spec{thresholds, signs, mode};
    effective = spec.effective_signs();
    return standardize(fits, spec);
  }

  ref::Matrix residual_matrix() const {
    ref::Matrix out;
    for (const auto& r : residuals) out.emplace_back(r.values().begin(), r.values().end());
    return out;
  }

  std::vector<ref::Point> ref_points() const {
    std::vector<ref::Point> out;
    for (const auto& p : seg.points) out.push_back({p.edge.first, p.edge.second, p.edge.w, p.active_set});
    return out;
  }
};

}  // namespace

TEST(Quantile, OrderStatisticOfConstructedSample) {
  std::vector<double> h(100);
  for (std::size_t k = 0; k < 100; ++k) h[k] = (k + 1) / 100.0;
  std::reverse(h.begin(), h.end());
  const auto q = bootstrap::empirical_quantile(h, 0.05);
  EXPECT_EQ(q.index, 95u);
  EXPECT_DOUBLE_EQ(q.a, 0.95);
  EXPECT_EQ(q.h_tilde, h);
}

TEST(Quantile, MatchesSortOracle) {
  const auto sample = testutil::normal_values(997, 3);
  std::vector<double> h;
  for (double x : sample) h.push_back(std::abs(x));
  std::vector<double> sorted = h;
  std::sort(sorted.begin(), sorted.end());
  double previous = 0.0;
  for (double alpha : {0.5, 0.2, 0.1, 0.05, 0.01, 0.001}) {
    const auto q = bootstrap::empirical_quantile(h, alpha);
    const auto index = static_cast<std::size_t>(std::ceil((1.0 - alpha) * 997));
    EXPECT_EQ(q.index, index);
    EXPECT_EQ(q.a, sorted[index - 1]);
    EXPECT_GE(q.a, previous);
    previous = q.a;
  }
  EXPECT_EQ(bootstrap::quantile_index(0.05, 1), 1u);
  EXPECT_EQ(bootstrap::quantile_index(0.999, 10), 1u);
  EXPECT_EQ(bootstrap::quantile_index(0.05, 1000), 950u);
  EXPECT_EQ(bootstrap::quantile_index(0.05, 5000), 4750u);
  EXPECT_THROW(bootstrap::quantile_index(0.0, 10), InvalidParameterError);
  EXPECT_THROW(bootstrap::quantile_index(0.05, 0), InvalidParameterError);
}

TEST(Bootstrap, SymmetricSampleGivesZero) {
  const Lattice lat(2, 2);
  // Residual values at both edge pixels are {1, -1, 1, -1}; with all
  // multipliers +1 the bootstrap sum vanishes.
  std::vector<double> values(4 * 4, 0.0);
  const double at_point[] = {1, -1, 1, -1};
  for (std::size_t l = 0; l < 4; ++l) values[l * 4 + 0] = values[l * 4 + 1] = at_point[l];
  const std::vector<FieldStack> resid = {FieldStack(lat, 4, values)};
  const BoundarySegmentation seg{{{{0, 1, 0.5}, 1}}, 0.1};
  const int sign = 1;
  const bootstrap::BoundaryResiduals br(resid, seg, std::span<const int>(&sign, 1));
  const std::vector<double> ones(4, 1.0);
  EXPECT_EQ(br.statistic(ones), 0.0);
  const std::vector<double> flipped = {1, -1, 1, -1};
  // Sample {1,1,1,1} has zero spread.
  EXPECT_THROW(br.statistic(flipped), DegenerateBootstrapError);
  const std::vector<double> mixed = {1, 1, 1, -1};
  // Sample {1,-1,1,1}: sum 2, sd sqrt(1), G = 2 / 2 / 1.
  EXPECT_NEAR(br.statistic(mixed), 1.0, 1e-15);
}

TEST(Bootstrap, EmptySegmentationThrows) {
  const std::vector<FieldStack> resid = {FieldStack(Lattice(2, 2), 4)};
  const int sign = 1;
  EXPECT_THROW(bootstrap::bootstrap_quantile(resid, BoundarySegmentation{{}, 0.1}, std::span<const int>(&sign, 1), {}),
               EmptyEstimateError);
}

TEST(Bootstrap, MatchesReferenceOnSmallLattice) {
  const Fixture fx(6, 8, 2, 100);
  ASSERT_FALSE(fx.seg.points.empty());
  const auto q = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {50, 0.05, 9, 1});
  const auto expected = ref::h_tilde(fx.residual_matrix(), fx.n, fx.ref_points(), fx.effective, 9, 50);
  ASSERT_EQ(q.h_tilde.size(), 50u);
  for (std::size_t b = 0; b < 50; ++b) EXPECT_NEAR(q.h_tilde[b], expected[b], 1e-12) << b;
}

TEST(Bootstrap, MatchesReferenceThreeConditionsMixedSigns) {
  const Fixture fx(12, 15, 3, 200, CombineMode::disjunction, {1, -1, 1});
  const auto q = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {130, 0.1, 4, 2});
  const auto expected = ref::h_tilde(fx.residual_matrix(), fx.n, fx.ref_points(), fx.effective, 4, 130);
  for (std::size_t b = 0; b < 130; ++b) EXPECT_NEAR(q.h_tilde[b], expected[b], 1e-12) << b;
}

TEST(Bootstrap, SegmentationMatchesReference) {
  const Fixture fx(6, 8, 2, 100);
  ref::Matrix g;
  for (const auto& f : fx.fields.g_hat) g.emplace_back(f.values().begin(), f.values().end());
  const auto expected = ref::boundary_points(g, 6, 6, fx.seg.eta);
  ASSERT_EQ(expected.size(), fx.seg.points.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(expected[k].active, fx.seg.points[k].active_set);
}

TEST(Bootstrap, ThreadCountInvariance) {
  const Fixture fx(24, 30, 2, 300);
  const auto base = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {1000, 0.05, 77, 1});
  for (unsigned workers : {4u, 16u, 0u}) {
    const auto other = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {1000, 0.05, 77, workers});
    EXPECT_EQ(other.h_tilde, base.h_tilde) << workers;
    EXPECT_EQ(other.a, base.a);
  }
}

TEST(Bootstrap, BlockPathMatchesSingleRealizationPath) {
  const Fixture fx(16, 20, 2, 400);
  const bootstrap::BoundaryResiduals br(fx.residuals, fx.seg, fx.effective);
  std::vector<double> block(70);
  br.statistics(5, 3, block);
  for (std::size_t k = 0; k < block.size(); ++k) {
    EXPECT_NEAR(block[k], br.statistic(rng::rademacher_stream(5, 3 + k, fx.n)), 1e-12);
  }
}

TEST(Bootstrap, SignFlipSymmetryForOneCondition) {
  const Fixture fx(16, 20, 1, 500);
  std::vector<FieldStack> negated = fx.residuals;
  for (auto& r : negated) {
    for (auto& v : r.values()) v = -v;
  }
  const auto a = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {400, 0.05, 12, 1});
  const auto b = bootstrap::bootstrap_quantile(negated, fx.seg, fx.effective, {400, 0.05, 12, 1});
  EXPECT_EQ(a.h_tilde, b.h_tilde);
}

TEST(Bootstrap, SingleConditionIsMaxAbsoluteField) {
  const Fixture fx(16, 20, 1, 600);
  const auto q = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {200, 0.05, 3, 1});
  const std::size_t pixels = fx.lat.size();
  for (std::size_t b = 0; b < 200; ++b) {
    const auto r = rng::rademacher_stream(3, b, fx.n);
    double expected = 0.0;
    const auto t_at = [&](std::size_t pixel) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t l = 0; l < fx.n; ++l) {
        const double e = fx.residuals[0].values()[l * pixels + pixel];
        sum += r[l] * e;
        sq += e * e;
      }
      return sum / std::sqrt(fx.n) / std::sqrt((sq - sum * sum / fx.n) / (fx.n - 1));
    };
    for (const auto& p : fx.seg.points) {
      const double g = (p.edge.w < 1 ? (1 - p.edge.w) * t_at(p.edge.first) : 0.0) +
                       (p.edge.w > 0 ? p.edge.w * t_at(p.edge.second) : 0.0);
      expected = std::max(expected, std::abs(g));
    }
    EXPECT_NEAR(q.h_tilde[b], expected, 1e-12);
  }
}

TEST(Bootstrap, NonNegativeAndMonotoneQuantile) {
  const Fixture fx(20, 25, 2, 700);
  const auto q = bootstrap::bootstrap_quantile(fx.residuals, fx.seg, fx.effective, {500, 0.05, 1, 1});
  for (double h : q.h_tilde) EXPECT_GE(h, 0.0);
  double prev = 0.0;
  for (double alpha : {0.5, 0.2, 0.1, 0.05, 0.01}) {
    const double a = bootstrap::empirical_quantile(q.h_tilde, alpha).a;
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(Bootstrap, HTildeCsv) {
  testutil::TempDir dir;
  const std::vector<double> h = {0.5, 1.25};
  bootstrap::write_h_tilde_csv(dir / "h.csv", h);
  EXPECT_EQ(testutil::read_file(dir / "h.csv"), "realization,h_tilde\n0,0.5\n1,1.25\n");
}

TEST(Bootstrap, ConfigValidation) {
  EXPECT_THROW((bootstrap::BootstrapConfig{0, 0.05, 0, 1}.validate()), InvalidParameterError);
  EXPECT_THROW((bootstrap::BootstrapConfig{10, 1.0, 0, 1}.validate()), InvalidParameterError);
}

#include <cmath>

#include <gtest/gtest.h>

#include "confreg/errors.hpp"
#include "confreg/simharness.hpp"
#include "test_util.hpp"

using namespace confreg;

namespace {

sim::SimulationSpec small_spec() {
  sim::SimulationSpec spec;
  spec.image_size = 40;
  spec.shape_radius = 10.0;
  spec.separation = 8.0;
  spec.n = 30;
  spec.instances = 6;
  spec.boot = {200, 0.05, 0, 1};
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST(Signal, ZeroSeparationGivesIdenticalFields) {
  for (auto scenario : {sim::Scenario::circles, sim::Scenario::squares}) {
    sim::SimulationSpec spec;
    spec.scenario = scenario;
    spec.separation = 0.0;
    const auto mu = sim::generate_signal(spec);
    ASSERT_EQ(mu.size(), 2u);
    EXPECT_TRUE(std::equal(mu[0].values().begin(), mu[0].values().end(), mu[1].values().begin()));
  }
}

TEST(Signal, ThresholdPairing) {
  sim::SimulationSpec spec;
  EXPECT_EQ(spec.threshold(), 2.0);
  spec.snr = sim::Snr::low;
  EXPECT_EQ(spec.threshold(), 0.5);
}

TEST(Signal, CirclesAreSmoothedScaledDisks) {
  sim::SimulationSpec spec;
  spec.separation = 20.0;
  const auto high = sim::generate_signal(spec);
  spec.snr = sim::Snr::low;
  const auto low = sim::generate_signal(spec);
  const Lattice lat(100, 100);
  // Disk 1 is centred at (49.5, 39.5), disk 2 at (49.5, 59.5).
  EXPECT_NEAR(high[0].at(49, 39), 3.0, 1e-3);
  EXPECT_NEAR(high[1].at(50, 60), 3.0, 1e-3);
  EXPECT_LT(high[0].at(49, 80), 1e-6);
  for (std::size_t s = 0; s < lat.size(); ++s) {
    EXPECT_NEAR(low[0][s], high[0][s] / 4.0, 1e-15);
    EXPECT_NEAR(high[0].at(lat.row_of(s), lat.col_of(s)), high[1].at(lat.row_of(s), 99 - lat.col_of(s)), 1e-12);
  }
  ScalarField disk(lat);
  for (std::size_t r = 0; r < 100; ++r) {
    for (std::size_t c = 0; c < 100; ++c) {
      const double dx = c - 39.5, dy = r - 49.5;
      disk.at(r, c) = dx * dx + dy * dy <= 625.0 ? 3.0 : 0.0;
    }
  }
  const auto expected = gaussian_smooth(disk, 5.0);
  for (std::size_t s = 0; s < lat.size(); ++s) EXPECT_EQ(high[0][s], expected[s]);
}

TEST(Signal, RampGradient) {
  sim::SimulationSpec spec;
  spec.scenario = sim::Scenario::ramps;
  spec.gradient_multiplier = 1.0;
  const auto mu = sim::generate_signal(spec);
  EXPECT_NEAR(mu[0].at(10, 70) - mu[0].at(10, 20), 8.0, 1e-12);
  EXPECT_NEAR(mu[1].at(70, 10) - mu[1].at(20, 10), 8.0, 1e-12);
  EXPECT_NEAR(mu[0].at(3, 40) - mu[0].at(90, 40), 0.0, 1e-12);
  // Threshold crossing lies midway between columns 49 and 50.
  EXPECT_LT(mu[0].at(0, 49), 2.0);
  EXPECT_GT(mu[0].at(0, 50), 2.0);
  EXPECT_NEAR(mu[0].at(0, 49) + mu[0].at(0, 50), 4.0, 1e-12);
  spec.snr = sim::Snr::low;
  spec.gradient_multiplier = 0.5;
  const auto low = sim::generate_signal(spec);
  EXPECT_NEAR(low[0].at(0, 99) - low[0].at(0, 49), 0.5 * 2.0 / 50.0 * 50.0, 1e-12);
}

TEST(Noise, PerfectCorrelationGivesEqualFields) {
  auto spec = small_spec();
  spec.noise_rho = 1.0;
  const auto noise = sim::generate_noise(spec, 17);
  EXPECT_TRUE(std::equal(noise[0].values().begin(), noise[0].values().end(), noise[1].values().begin()));
}

TEST(Noise, IndependentNoiseIsUncorrelatedWithUnitVariance) {
  auto spec = small_spec();
  spec.image_size = 100;
  spec.n = 100;  // 10^6 pooled draws per condition
  const auto noise = sim::generate_noise(spec, 23);
  double sxy = 0, sxx = 0, syy = 0, sx = 0, sy = 0;
  const auto x = noise[0].values();
  const auto y = noise[1].values();
  const double count = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    syy += y[k] * y[k];
    sxy += x[k] * y[k];
  }
  const double cov = sxy / count - sx / count * sy / count;
  const double vx = sxx / count - sx / count * sx / count;
  const double vy = syy / count - sy / count * sy / count;
  EXPECT_LT(std::abs(cov / std::sqrt(vx * vy)), 0.005);
  EXPECT_NEAR(vx, 1.0, 0.01);
  EXPECT_NEAR(vy, 1.0, 0.01);
}

TEST(Noise, EquicorrelationForThreeConditions) {
  auto spec = small_spec();
  spec.conditions = 3;
  spec.noise_rho = -0.4;
  spec.n = 200;
  const auto noise = sim::generate_noise(spec, 29);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      double sxy = 0, sxx = 0, syy = 0;
      const auto x = noise[i].values();
      const auto y = noise[j].values();
      for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += x[k] * y[k];
        sxx += x[k] * x[k];
        syy += y[k] * y[k];
      }
      EXPECT_NEAR(sxy / std::sqrt(sxx * syy), -0.4, 0.01);
      EXPECT_NEAR(sxx / x.size(), 1.0, 0.02);
    }
  }
  spec.noise_rho = -0.6;
  EXPECT_THROW(sim::generate_noise(spec, 29), ConfigurationError);
}

TEST(Noise, DeterministicPerSeed) {
  const auto spec = small_spec();
  const auto a = sim::generate_noise(spec, 1);
  const auto b = sim::generate_noise(spec, 1);
  const auto c = sim::generate_noise(spec, 2);
  EXPECT_TRUE(std::equal(a[0].values().begin(), a[0].values().end(), b[0].values().begin()));
  EXPECT_FALSE(std::equal(a[0].values().begin(), a[0].values().end(), c[0].values().begin()));
}

TEST(Spec, Validation) {
  auto spec = small_spec();
  spec.instances = 0;
  EXPECT_THROW(sim::run_coverage(spec), ConfigurationError);
  spec = small_spec();
  spec.noise_rho = 1.5;
  EXPECT_THROW(spec.validate(), ConfigurationError);
  EXPECT_THROW(sim::parse_scenario("hexagons"), ConfigurationError);
  EXPECT_THROW(sim::parse_snr("medium"), ConfigurationError);
  spec = small_spec();
  spec.separation = 60.0;
  EXPECT_FALSE(spec.extrapolation_warnings().empty());
  spec.separation = 40.0;
  EXPECT_TRUE(spec.extrapolation_warnings().empty());
}

TEST(Binomial, Interval) {
  const auto [lo, hi] = sim::binomial_interval(95, 100);
  EXPECT_NEAR(lo, 0.95 - 1.96 * std::sqrt(0.95 * 0.05 / 100), 1e-15);
  EXPECT_NEAR(hi, 0.95 + 1.96 * std::sqrt(0.95 * 0.05 / 100), 1e-15);
  EXPECT_EQ(sim::binomial_interval(1, 1), (std::pair<double, double>{1.0, 1.0}));
  EXPECT_EQ(sim::binomial_interval(0, 1), (std::pair<double, double>{0.0, 0.0}));
  EXPECT_EQ(sim::binomial_interval(3, 3).second, 1.0);
  EXPECT_THROW(sim::binomial_interval(0, 0), InvalidParameterError);
}

TEST(Coverage, SingleInstanceIsZeroOrOne) {
  auto spec = small_spec();
  spec.instances = 1;
  const auto report = sim::run_coverage(spec);
  EXPECT_EQ(report.instances, 1u);
  EXPECT_EQ(report.valid + report.empty, 1u);
  ASSERT_EQ(report.valid, 1u);
  EXPECT_TRUE(report.coverage == 0.0 || report.coverage == 1.0);
  EXPECT_EQ(report.ci_low, report.coverage);
  EXPECT_EQ(report.ci_high, report.coverage);
}

TEST(Coverage, DeterministicAcrossWorkerCounts) {
  auto spec = small_spec();
  const auto a = sim::run_coverage(spec);
  spec.workers = 4;
  const auto b = sim::run_coverage(spec);
  spec.workers = 16;  // more workers than instances: bootstrap-level parallelism
  const auto c = sim::run_coverage(spec);
  EXPECT_EQ(sim::report_to_json(a, false).dump(), sim::report_to_json(b, false).dump());
  EXPECT_EQ(sim::report_to_json(a, false).dump(), sim::report_to_json(c, false).dump());
  EXPECT_EQ(a.nesting_violations, 0u);
}

TEST(Coverage, InstanceOutcomesRepeat) {
  const auto spec = small_spec();
  const double alphas[] = {0.05, 0.2};
  const auto a = sim::run_instance(spec, 3, alphas);
  const auto b = sim::run_instance(spec, 3, alphas, sim::Method::proposed, 4);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.covered, b.covered);
  EXPECT_EQ(a.boundary_points, b.boundary_points);
}

TEST(Coverage, SmallerAlphaCoversAtLeastAsOften) {
  auto spec = small_spec();
  spec.n = 20;
  const double alphas[] = {0.05, 0.2};
  std::size_t cover05 = 0, cover20 = 0;
  for (std::size_t i = 0; i < 25; ++i) {
    const auto o = sim::run_instance(spec, i, alphas);
    if (o.empty_estimate) continue;
    EXPECT_GE(o.a[0], o.a[1]);
    EXPECT_TRUE(o.nested);
    if (o.covered[1]) EXPECT_TRUE(o.covered[0]);
    cover05 += o.covered[0];
    cover20 += o.covered[1];
  }
  EXPECT_GE(cover05, cover20);
}

TEST(Coverage, NaiveEqualsProposedForOneCondition) {
  auto spec = small_spec();
  spec.conditions = 1;
  const double alphas[] = {0.05, 0.1};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto p = sim::run_instance(spec, i, alphas, sim::Method::proposed);
    const auto n = sim::run_instance(spec, i, alphas, sim::Method::naive);
    EXPECT_EQ(p.a, n.a);
    EXPECT_EQ(p.covered, n.covered);
    EXPECT_EQ(p.boundary_points, n.boundary_points);
  }
  const auto rp = sim::run_coverage(spec);
  const auto rn = sim::naive_comparison(spec);
  EXPECT_EQ(rp.covered, rn.covered);
  EXPECT_EQ(rp.mean_a, rn.mean_a);
}

TEST(Coverage, EmptyEstimatesAreCountedSeparately) {
  auto spec = small_spec();
  spec.scenario = sim::Scenario::circles;
  spec.separation = 50.0;  // disks of radius 10 no longer overlap
  spec.instances = 3;
  const auto report = sim::run_coverage(spec);
  EXPECT_EQ(report.empty, 3u);
  EXPECT_EQ(report.valid, 0u);
  EXPECT_TRUE(std::isnan(report.coverage));
}

TEST(Coverage, ReportSerialization) {
  testutil::TempDir dir;
  auto spec = small_spec();
  spec.instances = 2;
  const auto report = sim::run_coverage(spec);
  const auto j = sim::report_to_json(report);
  EXPECT_EQ(j["method"], "proposed");
  EXPECT_EQ(j["spec"]["scenario"], "circles");
  EXPECT_EQ(j["spec"]["separation"], 8.0);
  EXPECT_TRUE(j.contains("runtime"));
  EXPECT_FALSE(sim::report_to_json(report, false).contains("runtime"));
  const std::vector<sim::CoverageReport> reports = {report};
  sim::write_coverage_csv(dir / "c.csv", reports);
  const std::string csv = testutil::read_file(dir / "c.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "scenario,snr,n,geometry,noise_rho,method,instances,valid,covered,coverage,ci_low,ci_high,mean_a");
}

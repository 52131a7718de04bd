#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "tremor/errors.hpp"
#include "tremor/stats.hpp"

namespace tremor {
namespace {

std::vector<double> normal_sample(std::size_t n, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

TEST(NormalCdf, KnownValues) {
  EXPECT_NEAR(normal_cdf(0.0, 0.0, 1.0), 0.5, 1e-16);
  // scipy.stats.norm.cdf(1.96)
  EXPECT_NEAR(normal_cdf(1.96, 0.0, 1.0), 0.97500210485177952, 1e-15);
  EXPECT_NEAR(normal_cdf(3.0, 1.0, 2.0), 0.84134474606854293, 1e-15);
  EXPECT_NEAR(normal_log_pdf(0.0, 0.0, 1.0), -0.91893853320467274, 1e-15);
}

TEST(Kolmogorov, PValueReference) {
  // 1 - K(lambda) with lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D, mpmath.
  EXPECT_NEAR(kolmogorov_p_value(0.05, 100), 0.95960044586268600, 1e-10);
  EXPECT_NEAR(kolmogorov_p_value(0.2, 50), 0.031376652153072500, 1e-10);
  EXPECT_EQ(kolmogorov_p_value(0.0, 10), 1.0);
}

TEST(KsNormal, AcceptsMatchingSample) {
  const double sd = std::sqrt(0.0006);
  const auto x = normal_sample(10000, sd, 5);
  const auto ks = ks_normal(x, 0.0, sd);
  EXPECT_EQ(ks.n, 10000u);
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(KsNormal, RejectsUniformSample) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::vector<double> x(10000);
  for (auto& v : x) v = u(rng);
  const double sd = 0.1 / std::sqrt(12.0);
  EXPECT_LT(ks_normal(x, 0.0, sd).p_value, 0.01);
}

TEST(Histogram, BinsAndOccupancy) {
  const std::vector<double> v{0.05, 0.15, 0.15, -0.05, 0.19};
  const auto h = make_histogram(v, 0.1, 2);
  EXPECT_EQ(h.bin_of(0.15), 1);
  EXPECT_EQ(h.bin_of(-0.05), -1);
  EXPECT_TRUE(h.includes(0.11));
  EXPECT_FALSE(h.includes(0.05));
  EXPECT_FALSE(h.includes(0.55));
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, v.size());
}

TEST(GaussianFit, ConstantSeriesIsDegenerate) {
  const std::vector<double> x(200, 0.0);
  const auto fit = gaussian_fit(x, 10, 0.01);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.variance, 0.0);
  EXPECT_TRUE(std::isnan(fit.ks.p_value));
}

TEST(GaussianFit, AllBinsExcludedThrows) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  EXPECT_THROW(gaussian_fit(x, 10, 0.1), EstimationError);
}

TEST(GaussianFit, FilteringNeverAddsValues) {
  const auto x = normal_sample(5000, 0.02, 3);
  std::size_t previous = x.size();
  for (std::size_t occ : {1u, 5u, 10u, 50u, 200u}) {
    const auto fit = gaussian_fit(x, occ, 0.004);
    EXPECT_LE(fit.n_used, previous);
    EXPECT_EQ(fit.n_total, x.size());
    previous = fit.n_used;
  }
  const auto fit = gaussian_fit(x, 10, 0.004);
  EXPECT_NEAR(fit.variance, 0.0004, 0.00004);
}

TEST(Likelihood, FullSampleMatchesSum) {
  const std::vector<double> r{0.01, -0.02, 0.005};
  double expected = 0.0;
  for (double v : r) expected += normal_log_pdf(v, 0.0, 0.02);
  EXPECT_NEAR(gaussian_log_likelihood(r, 0.02, LikelihoodMode::FullSample, 10, 0.004),
              expected, 1e-12);
  EXPECT_EQ(gaussian_log_likelihood(r, 0.0, LikelihoodMode::FullSample, 10, 0.004),
            -std::numeric_limits<double>::infinity());
}

TEST(Likelihood, FilteredPeaksNearTrueSigma) {
  const auto x = normal_sample(20000, 0.02, 21);
  double best_sigma = 0.0, best = -std::numeric_limits<double>::infinity();
  for (double s = 0.012; s <= 0.03; s += 0.001) {
    const double ll = gaussian_log_likelihood(x, s, LikelihoodMode::FilteredBins, 10, 0.2 * s);
    if (ll > best) {
      best = ll;
      best_sigma = s;
    }
  }
  EXPECT_NEAR(best_sigma, 0.02, 0.0015);
}

}  // namespace
}  // namespace tremor

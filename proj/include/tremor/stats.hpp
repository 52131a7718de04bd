#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tremor {

double normal_cdf(double x, double mean, double sd);
double normal_log_pdf(double x, double mean, double sd);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Asymptotic Kolmogorov survival function with the small-sample
// correction lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D.
double kolmogorov_p_value(double statistic, std::size_t n);

// Two-sided one-sample KS test against Normal(mean, sd^2).
KsResult ks_normal(std::span<const double> sample, double mean, double sd);

// Fixed-width histogram with bins [origin + k w, origin + (k+1) w).
struct Histogram {
  double bin_width = 0.0;
  double origin = 0.0;
  std::int64_t first_bin = 0;
  std::vector<std::size_t> counts;
  std::vector<bool> included;  // occupancy >= threshold

  std::int64_t bin_of(double x) const;
  double lower(std::size_t k) const;
  double upper(std::size_t k) const { return lower(k) + bin_width; }
  bool includes(double x) const;
};

Histogram make_histogram(std::span<const double> values, double bin_width,
                         std::size_t min_occupancy, double origin = 0.0);

struct GaussianFit {
  double mean = 0.0;
  double variance = 0.0;
  bool degenerate = false;  // variance is zero
  KsResult ks;              // against Normal(mean, variance), retained values only
  std::size_t n_total = 0;
  std::size_t n_used = 0;
  Histogram histogram;
};

// Histograms `etas`, keeps bins with at least `min_occupancy` values and
// fits a normal to the retained values. Throws EstimationError when every
// bin is excluded.
GaussianFit gaussian_fit(std::span<const double> etas, std::size_t min_occupancy,
                         double bin_width);

enum class LikelihoodMode { FilteredBins, FullSample };

// Gaussian log-likelihood of residuals under Normal(0, sigma^2). In
// FilteredBins mode only values in bins (width bin_width) meeting the
// occupancy threshold count, each conditioned on the retained region.
double gaussian_log_likelihood(std::span<const double> residuals, double sigma,
                               LikelihoodMode mode, std::size_t min_occupancy,
                               double bin_width);

}  // namespace tremor

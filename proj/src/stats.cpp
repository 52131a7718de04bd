#include "tremor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tremor/errors.hpp"

namespace tremor {

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double kolmogorov_p_value(double statistic, std::size_t n) {
  if (n == 0) return 1.0;
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normal(std::span<const double> sample, double mean, double sd) {
  if (sample.empty()) throw DomainError("ks_normal: empty sample");
  if (!(sd > 0.0)) throw DomainError("ks_normal: standard deviation must be positive");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i], mean, sd);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  return {d, kolmogorov_p_value(d, sorted.size()), sorted.size()};
}

std::int64_t Histogram::bin_of(double x) const {
  return static_cast<std::int64_t>(std::floor((x - origin) / bin_width));
}

double Histogram::lower(std::size_t k) const {
  return origin + static_cast<double>(first_bin + static_cast<std::int64_t>(k)) * bin_width;
}

bool Histogram::includes(double x) const {
  const auto b = bin_of(x) - first_bin;
  return b >= 0 && static_cast<std::size_t>(b) < counts.size() &&
         included[static_cast<std::size_t>(b)];
}

Histogram make_histogram(std::span<const double> values, double bin_width,
                         std::size_t min_occupancy, double origin) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw DomainError("histogram bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  h.origin = origin;
  if (values.empty()) return h;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.first_bin = h.bin_of(*lo);
  const auto last = h.bin_of(*hi);
  h.counts.assign(static_cast<std::size_t>(last - h.first_bin + 1), 0);
  for (double v : values) ++h.counts[static_cast<std::size_t>(h.bin_of(v) - h.first_bin)];
  h.included.resize(h.counts.size());
  for (std::size_t k = 0; k < h.counts.size(); ++k) h.included[k] = h.counts[k] >= min_occupancy;
  return h;
}

GaussianFit gaussian_fit(std::span<const double> etas, std::size_t min_occupancy,
                         double bin_width) {
  if (etas.empty()) throw DomainError("gaussian_fit: no residuals");
  GaussianFit fit;
  fit.n_total = etas.size();
  fit.histogram = make_histogram(etas, bin_width, min_occupancy);
  std::vector<double> kept;
  kept.reserve(etas.size());
  for (double e : etas)
    if (fit.histogram.includes(e)) kept.push_back(e);
  if (kept.empty()) throw EstimationError("gaussian_fit: every histogram bin is below the occupancy threshold");
  fit.n_used = kept.size();

  double sum = 0.0;
  for (double e : kept) sum += e;
  fit.mean = sum / static_cast<double>(kept.size());
  double ss = 0.0;
  for (double e : kept) ss += (e - fit.mean) * (e - fit.mean);
  fit.variance = kept.size() > 1 ? ss / static_cast<double>(kept.size() - 1) : 0.0;
  fit.degenerate = !(fit.variance > 0.0);
  if (fit.degenerate) {
    fit.ks = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
              kept.size()};
  } else {
    fit.ks = ks_normal(kept, fit.mean, std::sqrt(fit.variance));
  }
  return fit;
}

double gaussian_log_likelihood(std::span<const double> residuals, double sigma,
                               LikelihoodMode mode, std::size_t min_occupancy,
                               double bin_width) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(sigma > 0.0) || residuals.empty()) return kNegInf;
  if (mode == LikelihoodMode::FullSample) {
    double ll = 0.0;
    for (double r : residuals) ll += normal_log_pdf(r, 0.0, sigma);
    return ll;
  }
  const auto h = make_histogram(residuals, bin_width, min_occupancy);
  double mass = 0.0;
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    if (h.included[k]) mass += normal_cdf(h.upper(k), 0.0, sigma) - normal_cdf(h.lower(k), 0.0, sigma);
  if (!(mass > 0.0)) return kNegInf;
  double ll = 0.0;
  std::size_t used = 0;
  for (double r : residuals)
    if (h.includes(r)) {
      ll += normal_log_pdf(r, 0.0, sigma);
      ++used;
    }
  if (used == 0) return kNegInf;
  return ll - static_cast<double>(used) * std::log(mass);
}

}  // namespace tremor

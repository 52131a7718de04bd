#include "tremor/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "tremor/coupling.hpp"
#include "tremor/engine.hpp"
#include "tremor/errors.hpp"

namespace tremor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_axis(const std::vector<double>& axis, const char* name, bool allow_zero) {
  if (axis.empty()) throw DomainError(fmt::format("grid axis {} is empty", name));
  for (std::size_t k = 0; k < axis.size(); ++k) {
    const double v = axis[k];
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
      throw DomainError(fmt::format("grid axis {}: invalid value {}", name, v));
    if (k > 0 && !(v > axis[k - 1]))
      throw DomainError(fmt::format("grid axis {} must be strictly ascending", name));
  }
}

}  // namespace

void validate(const CalibrationGrid& grid) {
  check_axis(grid.r_c_values, "r_c", false);
  check_axis(grid.tau_values, "tau", false);
  check_axis(grid.sigma_values, "sigma", true);
}

FiringTrace::FiringTrace(const ReturnPanel& observed, double r_c, const Modes& modes)
    : panel_(decompose(observed, ModelParams{1.0, 1.0, r_c, 0.0}, modes)),
      r_c_(r_c),
      modes_(modes) {
  for (std::size_t k = 0; k < panel_.records.size(); ++k)
    if (!panel_.records[k].gap) used_.push_back(k);
}

std::vector<double> FiringTrace::transfers(double gamma, double tau) const {
  const auto& universe = panel_.universe();
  const auto n = universe.size();
  std::vector<double> alpha(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j)
        alpha[i * n + j] =
            coupling_alpha(universe[i].capitalization, universe[j].capitalization, gamma);

  std::vector<double> out;
  out.reserve(used_.size());
  for (const auto k : used_) {
    const auto& rec = panel_.records[k];
    if (rec.n_star == 0) {
      out.push_back(0.0);
      continue;
    }
    const auto i = rec.event.exchange;
    double sum = 0.0;
    for (const auto& c : rec.contributors)
      sum += alpha[i * n + c.exchange] * std::exp(-c.lag / tau) * c.r_cum;
    const double div = modes_.normalization == Normalization::FiredCount
                           ? static_cast<double>(rec.n_star)
                           : static_cast<double>(n - 1);
    out.push_back(sum / div);
  }
  return out;
}

std::vector<double> FiringTrace::observed() const {
  std::vector<double> out;
  out.reserve(used_.size());
  for (const auto k : used_) out.push_back(panel_.records[k].return_total);
  return out;
}

std::vector<double> FiringTrace::residuals(double gamma, double tau) const {
  auto t = transfers(gamma, tau);
  for (std::size_t m = 0; m < used_.size(); ++m)
    t[m] = panel_.records[used_[m]].return_total - t[m];
  return t;
}

CTerms c_terms(const FiringTrace& trace, std::size_t seq, double tau) {
  const auto& panel = trace.panel();
  if (seq >= panel.records.size()) throw ConsistencyError("c_terms: record out of range");
  const auto& rec = panel.records[seq];
  const auto& universe = panel.universe();
  const double k_i = universe[rec.event.exchange].capitalization;
  CTerms out;
  for (const auto& c : rec.contributors) {
    const double ratio = k_i / universe[c.exchange].capitalization;
    const double weighted = c.r_cum * std::exp(-c.lag / tau);
    out.c += ratio * weighted;
    out.c_prime += ratio * ratio * weighted;
  }
  return out;
}

double slaved_gamma(const FiringTrace& trace, double tau, std::span<const double> eta) {
  const auto& used = trace.used();
  if (eta.size() != used.size())
    throw ConsistencyError("slaved_gamma: one residual per observed record is required");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < used.size(); ++m) {
    const auto& rec = trace.panel().records[used[m]];
    if (rec.n_star == 0) continue;
    const double inv_n = 1.0 / static_cast<double>(rec.n_star);
    const auto [c, c_prime] = c_terms(trace, used[m], tau);
    const double r = rec.return_total;
    num += inv_n * (r - eta[m]) * c;
    den += inv_n * inv_n * c * c - (eta[m] - r) * c_prime;
  }
  if (den == 0.0 || !std::isfinite(den)) throw EstimationError("gamma unidentifiable");
  return num / den;
}

ClosedFormGamma slaved_gamma_fixed_point(const FiringTrace& trace, double tau,
                                         const CalibrationOptions& options) {
  ClosedFormGamma out;
  double gamma = options.gamma_start;
  for (std::size_t it = 1; it <= options.fixed_point_max_iterations; ++it) {
    const auto eta = trace.residuals(gamma, tau);
    const double next = slaved_gamma(trace, tau, eta);
    out.iterations = it;
    if (!std::isfinite(next) || next <= 0.0) {
      out.gamma = next;
      return out;
    }
    const bool done = std::fabs(next - gamma) < options.fixed_point_tolerance;
    gamma = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.gamma = gamma;
  return out;
}

double profile_gamma(const FiringTrace& trace, double tau) {
  const auto& recs = trace.panel().records;
  const bool any_fired = std::any_of(trace.used().begin(), trace.used().end(),
                                     [&](std::size_t k) { return recs[k].n_star > 0; });
  if (!any_fired) throw EstimationError("gamma unidentifiable");

  auto sse = [&](double log_gamma) {
    double s = 0.0;
    for (double r : trace.residuals(std::exp(log_gamma), tau)) s += r * r;
    return s;
  };
  constexpr double lo = -7.0, hi = 7.0, h = 0.25;
  const int steps = static_cast<int>((hi - lo) / h);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    const double v = sse(lo + s * h);
    if (v < best_val) {
      best_val = v;
      best = s;
    }
  }
  double a = lo + std::max(best - 1, 0) * h;
  double b = lo + std::min(best + 1, steps) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = sse(x1), f2 = sse(x2);
  while (b - a > 1e-9) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = sse(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = sse(x2);
    }
  }
  return std::exp(0.5 * (a + b));
}

std::vector<double> residuals(const ReturnPanel& panel, const ModelParams& params,
                              const Modes& modes) {
  const auto decomposed = decompose(panel, params, modes);
  std::vector<double> out;
  out.reserve(decomposed.records.size());
  for (const auto& r : decomposed.records) out.push_back(r.gap ? kNaN : r.eta);
  return out;
}

CalibrationResult grid_calibrate(const ReturnPanel& observed, const CalibrationGrid& grid,
                                 const CalibrationOptions& options) {
  validate(grid);
  CalibrationResult result;
  result.options = options;
  result.points.reserve(grid.size());
  double best_ll = -std::numeric_limits<double>::infinity();
  bool found = false;

  for (const double r_c : grid.r_c_values) {
    const FiringTrace trace(observed, r_c, options.modes);
    for (const double tau : grid.tau_values) {
      GridPoint base;
      base.r_c = r_c;
      base.tau = tau;
      base.gamma_closed_form = kNaN;
      base.gamma_profile = kNaN;
      std::string why;
      try {
        const auto cf = slaved_gamma_fixed_point(trace, tau, options);
        base.gamma_closed_form = cf.gamma;
        base.closed_form_converged = cf.converged;
        base.closed_form_iterations = cf.iterations;
      } catch (const EstimationError& e) {
        why = e.what();
      }
      try {
        base.gamma_profile = profile_gamma(trace, tau);
      } catch (const EstimationError& e) {
        why = e.what();
      }
      double gamma = kNaN;
      if (options.gamma_method == GammaMethod::Profile) {
        gamma = base.gamma_profile;
      } else if (base.closed_form_converged && base.gamma_closed_form > 0.0) {
        gamma = base.gamma_closed_form;
      } else if (why.empty()) {
        why = fmt::format("closed-form gamma did not converge (last value {})",
                          base.gamma_closed_form);
      }
      std::vector<double> res;
      if (std::isfinite(gamma) && gamma > 0.0) res = trace.residuals(gamma, tau);

      for (const double sigma : grid.sigma_values) {
        GridPoint p = base;
        p.sigma = sigma;
        p.gamma = gamma;
        p.log_likelihood = -std::numeric_limits<double>::infinity();
        if (res.empty()) {
          p.diagnostic = why.empty() ? "gamma unidentifiable" : why;
        } else if (!(sigma > 0.0)) {
          p.diagnostic = "sigma must be positive to score residuals";
        } else {
          p.log_likelihood = gaussian_log_likelihood(res, sigma, options.likelihood,
                                                     options.min_occupancy,
                                                     options.bin_width_factor * sigma);
          p.identifiable = std::isfinite(p.log_likelihood);
          if (!p.identifiable) p.diagnostic = "no histogram bin meets the occupancy threshold";
        }
        if (p.identifiable && (!found || p.log_likelihood > best_ll)) {
          found = true;
          best_ll = p.log_likelihood;
          result.best_index = result.points.size();
        }
        result.points.push_back(std::move(p));
      }
    }
  }

  if (!found) {
    std::string msg = "calibration failed: gamma unidentifiable at every grid point";
    for (const auto& p : result.points)
      msg += fmt::format("\n  r_c={} tau={} sigma={}: {}", p.r_c, p.tau, p.sigma, p.diagnostic);
    throw EstimationError(msg);
  }

  const auto& best = result.points[result.best_index];
  result.params = ModelParams{best.gamma, best.tau, best.r_c, best.sigma};
  result.log_likelihood = best.log_likelihood;
  result.residuals = FiringTrace(observed, best.r_c, options.modes).residuals(best.gamma, best.tau);
  result.fit = gaussian_fit(result.residuals, options.min_occupancy,
                            options.bin_width_factor * best.sigma);
  return result;
}

}  // namespace tremor

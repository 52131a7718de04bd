#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tremor/stats.hpp"
#include "tremor/types.hpp"

namespace tremor {

struct CalibrationGrid {
  std::vector<double> r_c_values;
  std::vector<double> tau_values;
  std::vector<double> sigma_values;

  std::size_t size() const {
    return r_c_values.size() * tau_values.size() * sigma_values.size();
  }
};

void validate(const CalibrationGrid& grid);

// Which estimate of gamma is placed into the calibrated parameters.
enum class GammaMethod {
  ClosedForm,  // fixed point of the printed slaving formula
  Profile,     // numerical maximization of the full Gaussian likelihood
};

struct CalibrationOptions {
  Modes modes;
  LikelihoodMode likelihood = LikelihoodMode::FilteredBins;
  GammaMethod gamma_method = GammaMethod::Profile;
  std::size_t min_occupancy = 10;
  double bin_width_factor = 0.2;  // bin width = factor * sigma
  double gamma_start = 1.0;
  double fixed_point_tolerance = 1e-8;
  std::size_t fixed_point_max_iterations = 100;
};

// Fired-neighbour data of an observed panel for one threshold. The stress
// history does not depend on gamma or tau, so one trace serves every
// (gamma, tau) evaluation at that threshold.
class FiringTrace {
 public:
  FiringTrace(const ReturnPanel& observed, double r_c, const Modes& modes);

  const ReturnPanel& panel() const { return panel_; }
  double r_c() const { return r_c_; }

  // Indices of non-gap records.
  const std::vector<std::size_t>& used() const { return used_; }

  // Transfer terms of every used record under (gamma, tau).
  std::vector<double> transfers(double gamma, double tau) const;
  // Observed minus transfer for every used record.
  std::vector<double> residuals(double gamma, double tau) const;
  std::vector<double> observed() const;

 private:
  ReturnPanel panel_;  // decomposed at (any gamma, any tau, r_c)
  double r_c_;
  Modes modes_;
  std::vector<std::size_t> used_;
};

struct CTerms {
  double c = 0.0;
  double c_prime = 0.0;
};

// Capitalization-ratio weighted stress of the fired neighbours seen by
// record `seq`: sum (K_i/K_j) r_cum_j exp(-lag/tau), and the same with the
// squared ratio.
CTerms c_terms(const FiringTrace& trace, std::size_t seq, double tau);

struct ClosedFormGamma {
  double gamma = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Closed-form slaved gamma for given residuals `eta` (aligned with
// trace.used()). Records with no fired neighbour contribute nothing.
// Throws EstimationError("gamma unidentifiable") on a zero denominator.
double slaved_gamma(const FiringTrace& trace, double tau, std::span<const double> eta);

// Fixed-point iteration alternating residual extraction and the closed form.
ClosedFormGamma slaved_gamma_fixed_point(const FiringTrace& trace, double tau,
                                         const CalibrationOptions& options = {});

// Gamma maximizing the full-sample Gaussian likelihood (minimum residual sum
// of squares) over a log-spaced bracket, refined by golden-section search.
double profile_gamma(const FiringTrace& trace, double tau);

// Observed minus transfer per record; NaN for gap records.
std::vector<double> residuals(const ReturnPanel& panel, const ModelParams& params,
                              const Modes& modes = {});

struct GridPoint {
  double r_c = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  bool identifiable = false;
  std::string diagnostic;
  double gamma = 0.0;  // value used for scoring
  double gamma_closed_form = 0.0;
  bool closed_form_converged = false;
  std::size_t closed_form_iterations = 0;
  double gamma_profile = 0.0;
  double log_likelihood = 0.0;
};

struct CalibrationResult {
  ModelParams params;
  double log_likelihood = 0.0;
  std::size_t best_index = 0;
  std::vector<GridPoint> points;  // grid order: r_c outer, tau, sigma inner
  std::vector<double> residuals;  // one per non-gap record at the optimum
  GaussianFit fit;
  CalibrationOptions options;
};

// Exhaustive grid search. Throws EstimationError listing every point when
// no grid point is identifiable.
CalibrationResult grid_calibrate(const ReturnPanel& observed, const CalibrationGrid& grid,
                                 const CalibrationOptions& options = {});

}  // namespace tremor

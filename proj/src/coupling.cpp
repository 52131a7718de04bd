#include "tremor/coupling.hpp"

#include <cmath>

#include "tremor/errors.hpp"

namespace tremor {

namespace {
bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }
}  // namespace

double coupling_alpha(double k_i, double k_j, double gamma) {
  if (!positive_finite(k_i) || !positive_finite(k_j) || !positive_finite(gamma))
    throw DomainError("coupling_alpha: arguments must be positive and finite");
  // -expm1 keeps precision when the exponent is tiny (large gamma).
  return -std::expm1(-k_j / (k_i * gamma));
}

double coupling_beta(double lag_hours, double tau) {
  if (!std::isfinite(lag_hours) || lag_hours < 0.0)
    throw DomainError("coupling_beta: lag must be nonnegative and finite");
  if (!positive_finite(tau)) throw DomainError("coupling_beta: tau must be positive");
  return std::exp(-lag_hours / tau);
}

bool threshold_test(double r_cum, double r_c, Sidedness sidedness) {
  return sidedness == Sidedness::TwoSided ? std::fabs(r_cum) > r_c : r_cum > r_c;
}

double information_lag(double release_time, double pricing_time) {
  double lag = std::fmod(pricing_time - release_time, 24.0);
  if (lag < 0.0) lag += 24.0;
  return lag;
}

}  // namespace tremor

#pragma once

#include "tremor/types.hpp"

namespace tremor {

// Capitalization coupling 1 - exp(-k_j / (k_i * gamma)), in (0, 1).
double coupling_alpha(double k_i, double k_j, double gamma);

// Time-zone coupling exp(-lag_hours / tau), in (0, 1].
double coupling_beta(double lag_hours, double tau);

// Strict threshold crossing of the cumulative return.
bool threshold_test(double r_cum, double r_c, Sidedness sidedness = Sidedness::TwoSided);

// Cumulative-return update: a fired (consumed) stress is deleted before the
// fresh return is added.
constexpr double update_cum(double r_cum_prev, double r_new, bool fired_prev) {
  return fired_prev ? r_new : r_cum_prev + r_new;
}

// Hours between the release of information at `release_time` and its
// pricing at `pricing_time`, wrapped into [0, 24).
double information_lag(double release_time, double pricing_time);

}  // namespace tremor

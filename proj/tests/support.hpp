#pragma once

// Shared fixtures for the test binaries: small universes, randomized
// timelines and a deliberately naive reference stepper.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tremor/io.hpp"
#include "tremor/types.hpp"

namespace tremor::testing {

inline Exchange make_exchange(std::string id, double cap, double tz, double open,
                              double close) {
  return Exchange{id, id, cap, tz, open, close};
}

// Random universe of n exchanges; hours on a half-hour grid so that
// simultaneous events occur.
inline std::vector<Exchange> random_universe(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> log_cap(-3.0, 3.0);
  std::uniform_int_distribution<int> tz(-12, 14);
  std::uniform_int_distribution<int> half_hour(0, 47);
  std::uniform_int_distribution<int> length(2, 20);
  std::vector<Exchange> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double open = half_hour(rng) * 0.5;
    double close = open + length(rng) * 0.5;
    if (close >= 24.0) close -= 24.0;
    out.push_back(make_exchange("X" + std::to_string(100 + i), std::exp(log_cap(rng)),
                                tz(rng), open, close));
  }
  return out;
}

inline EventTimeline timeline_for(const std::vector<Exchange>& universe, std::size_t days,
                                  Date start = Date{std::chrono::year{2001} / 3 / 5}) {
  return build_timeline(universe, weekdays(start, days));
}

// Reference dynamics written directly from the model equations: couplings
// are recomputed for every pair and event, and simultaneous events are
// handled by pricing against a copy of the state frozen when the UTC time
// last changed.
struct NaiveStepper {
  std::vector<Exchange> universe;
  double gamma, tau, r_c;
  bool two_sided = true;
  bool divide_by_fired = true;

  struct Result {
    std::vector<double> returns;
    std::vector<double> transfers;
  };

  Result run(const std::vector<MarketEvent>& events, const std::vector<double>& eta) const {
    const std::size_t n = universe.size();
    std::vector<double> r_cum(n, 0.0), last_time(n, 0.0);
    std::vector<double> frozen_cum = r_cum, frozen_time = last_time;
    std::vector<std::size_t> pending_reset;
    std::vector<std::pair<std::size_t, double>> pending_accrual;
    double current_time = -1e300;
    Result out;
    auto flush = [&] {
      for (auto j : pending_reset) r_cum[j] = 0.0;
      for (auto [i, r] : pending_accrual) r_cum[i] += r;
      pending_reset.clear();
      pending_accrual.clear();
    };
    for (std::size_t k = 0; k < events.size(); ++k) {
      const auto& ev = events[k];
      if (ev.utc_time != current_time) {
        flush();
        frozen_cum = r_cum;
        frozen_time = last_time;
        current_time = ev.utc_time;
      }
      const std::size_t i = ev.exchange;
      double sum = 0.0;
      std::size_t fired = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const bool over = two_sided ? std::fabs(frozen_cum[j]) > r_c : frozen_cum[j] > r_c;
        if (!over) continue;
        ++fired;
        const double a = 1.0 - std::exp(-universe[j].capitalization /
                                        (universe[i].capitalization * gamma));
        double lag = ev.utc_time - frozen_time[j];
        while (lag >= 24.0) lag -= 24.0;
        while (lag < 0.0) lag += 24.0;
        sum += a * std::exp(-lag / tau) * frozen_cum[j];
        pending_reset.push_back(j);
      }
      double transfer = 0.0;
      if (fired > 0) transfer = sum / (divide_by_fired ? double(fired) : double(n - 1));
      const double r = transfer + eta[k];
      out.transfers.push_back(transfer);
      out.returns.push_back(r);
      pending_accrual.emplace_back(i, r);
      last_time[i] = ev.utc_time;
    }
    return out;
  }
};

}  // namespace tremor::testing

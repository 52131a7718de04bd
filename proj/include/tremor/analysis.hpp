#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tremor/types.hpp"

namespace tremor {

// Capitalization-weighted mean of `returns` over all exchanges except
// `exclude`. NaN entries (no observation) are skipped and the weights
// renormalized; the result is NaN when nothing remains.
double world_return(std::span<const double> returns, std::span<const double> caps,
                    std::optional<std::size_t> exclude = std::nullopt);

// Close-to-close log returns per exchange and session date.
struct DailyReturns {
  std::vector<std::int64_t> days;             // sorted session dates
  std::vector<std::vector<double>> returns;   // [day][exchange], NaN if missing
};

DailyReturns daily_returns(const ReturnPanel& panel);

struct SyncBin {
  double lo = 0.0;
  double hi = 0.0;
  double probability = 0.0;  // meaningful only when count > 0
  std::size_t count = 0;
  std::size_t agree = 0;
  bool defined() const { return count > 0; }
};

struct SyncCurve {
  std::vector<SyncBin> bins;
  std::size_t total() const;
};

// `count` equal-occupancy bins over `magnitudes`; the outer edges are 0
// and +infinity.
std::vector<double> quantile_edges(std::vector<double> magnitudes, std::size_t count = 10);

// Probability that an exchange's daily return has the sign of the world
// return computed without it, binned by |world return|.
SyncCurve sync_curve(const ReturnPanel& panel, std::span<const double> caps,
                     std::span<const double> bin_edges);

// |R_m| for every scorable (exchange, day) pair, for building edges.
std::vector<double> world_return_magnitudes(const ReturnPanel& panel,
                                            std::span<const double> caps);

// Probability that a responder's next open (close-to-open) return has the
// sign of the mover's preceding open-to-close return, binned by its size.
SyncCurve lead_lag_curve(const ReturnPanel& panel, std::size_t mover,
                         std::span<const std::size_t> responders,
                         std::span<const double> bin_edges);

enum class Sign { Up, Down, Abstain };

Sign predict_sign(const NetworkState& state, const MarketEvent& event,
                  const ModelParams& params, const std::vector<Exchange>& universe,
                  const Modes& modes = {});

struct BacktestReport {
  std::size_t n_events = 0;
  std::size_t n_predicted = 0;
  std::size_t hits = 0;
  double hit_rate = 0.0;         // hits / n_predicted
  double strict_hit_rate = 0.0;  // abstentions count as misses
};

// Walks the observed panel predicting each return's sign from the transfer
// term built on strictly earlier information.
BacktestReport backtest(const ReturnPanel& panel, const ModelParams& params,
                        const Modes& modes = {});

struct TremorPoint {
  std::int64_t day = 0;
  double a_value = 0.0;
  double world_index = 1.0;
};

// Daily sum of transfer terms and a capitalization-weighted world index
// compounding from 1.0.
std::vector<TremorPoint> tremor_activity(const ReturnPanel& panel, std::span<const double> caps);

}  // namespace tremor

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tremor/types.hpp"

namespace tremor {

struct TransferResult {
  double transfer = 0.0;
  std::size_t n_star = 0;
  std::vector<Contribution> contributors;
};

// Transfer term for exchange i priced at `pricing_time`, given the other
// exchanges' cumulative stress in `state`. With no fired neighbour the
// result is exactly zero and nothing is divided.
TransferResult transfer_return(std::size_t i, const NetworkState& state,
                               const std::vector<Exchange>& universe,
                               const ModelParams& params, const Modes& modes,
                               double pricing_time);

struct StepOutcome {
  NetworkState state;
  StepRecord record;
};

// One pricing event: R_i = transfer + eta_draw, price *= exp(R_i), consumed
// neighbours are reset and R_i accrues to exchange i's stress.
StepOutcome step(const NetworkState& state, const MarketEvent& event, double eta_draw,
                 const ModelParams& params, const std::vector<Exchange>& universe,
                 const Modes& modes);

// Stateful stepper over a timeline. Events sharing a UTC timestamp form one
// batch and all see the state from before the batch.
class Engine {
 public:
  Engine(std::vector<Exchange> universe, ModelParams params, Modes modes = {});

  const std::vector<Exchange>& universe() const { return universe_; }
  const ModelParams& params() const { return params_; }
  const Modes& modes() const { return modes_; }
  double alpha(std::size_t i, std::size_t j) const { return alpha_[i * n_ + j]; }

  TransferResult transfer(std::size_t i, const NetworkState& state, double pricing_time) const;

  // Advances `state` over one batch of simultaneous events. `values` holds
  // the noise draw or the observed return of each event; gap events are
  // recorded but neither consume nor accrue stress. An empty `gaps` means
  // every event is observed.
  enum class ReturnSource { NoiseDraw, Observed };
  void advance_batch(NetworkState& state, std::span<const MarketEvent> batch,
                     std::span<const double> values, std::span<const std::uint8_t> gaps,
                     ReturnSource source, std::vector<StepRecord>& out) const;

 private:
  std::vector<Exchange> universe_;
  ModelParams params_;
  Modes modes_;
  std::size_t n_ = 0;
  std::vector<double> alpha_;
};

// Runs the dynamics over the timeline with eta ~ Normal(0, sigma^2) drawn
// from a generator seeded by `seed`, one draw per event in timeline order.
ReturnPanel simulate(const EventTimeline& timeline, const ModelParams& params,
                     std::uint64_t seed, const Modes& modes = {},
                     std::optional<NetworkState> initial = std::nullopt);

// Same dynamics driven by caller-supplied noise; eta.size() == events.
ReturnPanel simulate_with_noise(const EventTimeline& timeline, const ModelParams& params,
                                std::span<const double> eta, const Modes& modes = {},
                                std::optional<NetworkState> initial = std::nullopt);

// Replays observed returns (record.return_total, gaps kept) through the
// network and fills in transfer, eta, n_star and contributors.
ReturnPanel decompose(const ReturnPanel& observed, const ModelParams& params,
                      const Modes& modes = {});

// Network state just before event `seq` when replaying observed returns.
NetworkState state_before(const ReturnPanel& observed, std::size_t seq,
                          const ModelParams& params, const Modes& modes = {});

}  // namespace tremor

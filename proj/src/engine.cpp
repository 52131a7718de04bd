#include "tremor/engine.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "tremor/coupling.hpp"
#include "tremor/errors.hpp"

namespace tremor {

namespace {

double divisor_for(const Modes& modes, std::size_t n_star, std::size_t n) {
  return modes.normalization == Normalization::FiredCount ? static_cast<double>(n_star)
                                                          : static_cast<double>(n - 1);
}

// Splits [0, events.size()) into maximal runs sharing one UTC time.
template <typename F>
void for_each_batch(const std::vector<MarketEvent>& events, F&& f) {
  std::size_t first = 0;
  while (first < events.size()) {
    std::size_t last = first + 1;
    while (last < events.size() && events[last].utc_time == events[first].utc_time) ++last;
    f(first, last);
    first = last;
  }
}

}  // namespace

TransferResult transfer_return(std::size_t i, const NetworkState& state,
                               const std::vector<Exchange>& universe,
                               const ModelParams& params, const Modes& modes,
                               double pricing_time) {
  return Engine(universe, params, modes).transfer(i, state, pricing_time);
}

Engine::Engine(std::vector<Exchange> universe, ModelParams params, Modes modes)
    : universe_(std::move(universe)), params_(params), modes_(modes), n_(universe_.size()) {
  validate_universe(universe_);
  validate(params_);
  alpha_.resize(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j)
        alpha_[i * n_ + j] = coupling_alpha(universe_[i].capitalization,
                                            universe_[j].capitalization, params_.gamma);
}

TransferResult Engine::transfer(std::size_t i, const NetworkState& state,
                                double pricing_time) const {
  if (i >= n_ || state.exchanges.size() != n_)
    throw ConsistencyError("transfer: state does not match the universe");
  TransferResult out;
  double sum = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j == i) continue;
    const auto& sj = state.exchanges[j];
    if (!threshold_test(sj.r_cum, params_.r_c, modes_.sidedness)) continue;
    const double lag = information_lag(sj.last_event_time, pricing_time);
    const double term = alpha(i, j) * coupling_beta(lag, params_.tau) * sj.r_cum;
    out.contributors.push_back({j, term, sj.r_cum, lag});
    sum += term;
  }
  out.n_star = out.contributors.size();
  if (out.n_star == 0) return out;
  const double div = divisor_for(modes_, out.n_star, n_);
  out.transfer = sum / div;
  for (auto& c : out.contributors) c.value /= div;
  return out;
}

void Engine::advance_batch(NetworkState& state, std::span<const MarketEvent> batch,
                           std::span<const double> values,
                           std::span<const std::uint8_t> gaps, ReturnSource source,
                           std::vector<StepRecord>& out) const {
  const std::size_t base = out.size();
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& ev = batch[k];
    if (ev.exchange >= n_)
      throw ConsistencyError(fmt::format("event {} references an unknown exchange", ev.seq));
    StepRecord rec;
    rec.event = ev;
    if (!gaps.empty() && gaps[k]) {
      rec.gap = true;
      out.push_back(std::move(rec));
      continue;
    }
    auto tr = transfer(ev.exchange, state, ev.utc_time);
    rec.transfer = tr.transfer;
    rec.n_star = tr.n_star;
    rec.contributors = std::move(tr.contributors);
    if (source == ReturnSource::NoiseDraw) {
      rec.eta = values[k];
      rec.return_total = rec.transfer + rec.eta;
    } else {
      rec.return_total = values[k];
      rec.eta = rec.return_total - rec.transfer;
    }
    out.push_back(std::move(rec));
  }
  // Consumed stress is deleted first, then the batch's own returns accrue.
  for (std::size_t k = base; k < out.size(); ++k)
    for (const auto& c : out[k].contributors) {
      auto& sj = state.exchanges[c.exchange];
      sj.r_cum = update_cum(sj.r_cum, 0.0, true);
    }
  for (std::size_t k = base; k < out.size(); ++k) {
    const auto& rec = out[k];
    if (rec.gap) continue;
    auto& si = state.exchanges[rec.event.exchange];
    si.r_cum = update_cum(si.r_cum, rec.return_total, false);
    si.last_price *= std::exp(rec.return_total);
    si.last_event_time = rec.event.utc_time;
    si.has_event = true;
  }
}

StepOutcome step(const NetworkState& state, const MarketEvent& event, double eta_draw,
                 const ModelParams& params, const std::vector<Exchange>& universe,
                 const Modes& modes) {
  if (event.exchange >= universe.size())
    throw ConsistencyError("step: event exchange is not in the universe");
  Engine engine(universe, params, modes);
  StepOutcome res{state, {}};
  std::vector<StepRecord> recs;
  const double eta[] = {eta_draw};
  engine.advance_batch(res.state, std::span(&event, 1), eta, {},
                       Engine::ReturnSource::NoiseDraw, recs);
  res.record = std::move(recs.front());
  return res;
}

namespace {

ReturnPanel run(const EventTimeline& timeline, const ModelParams& params, const Modes& modes,
                std::span<const double> values, std::span<const std::uint8_t> gaps,
                Engine::ReturnSource source, std::optional<NetworkState> initial) {
  validate(timeline);
  Engine engine(timeline.universe, params, modes);
  auto state = initial.value_or(NetworkState::initial(timeline.universe.size()));
  if (state.exchanges.size() != timeline.universe.size())
    throw ConsistencyError("initial state does not match the universe");
  ReturnPanel panel;
  panel.timeline = timeline;
  panel.records.reserve(timeline.size());
  const std::span<const MarketEvent> events(timeline.events);
  for_each_batch(timeline.events, [&](std::size_t first, std::size_t last) {
    const auto len = last - first;
    engine.advance_batch(state, events.subspan(first, len), values.subspan(first, len),
                         gaps.empty() ? gaps : gaps.subspan(first, len), source,
                         panel.records);
  });
  return panel;
}

}  // namespace

ReturnPanel simulate(const EventTimeline& timeline, const ModelParams& params,
                     std::uint64_t seed, const Modes& modes,
                     std::optional<NetworkState> initial) {
  validate(params);
  if (timeline.empty()) throw ConsistencyError("simulate: timeline is empty");
  validate(timeline);
  std::vector<double> eta(timeline.size(), 0.0);
  if (params.sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, params.sigma);
    for (auto& e : eta) e = noise(rng);
  }
  return run(timeline, params, modes, eta, {}, Engine::ReturnSource::NoiseDraw,
             std::move(initial));
}

ReturnPanel simulate_with_noise(const EventTimeline& timeline, const ModelParams& params,
                                std::span<const double> eta, const Modes& modes,
                                std::optional<NetworkState> initial) {
  if (eta.size() != timeline.size())
    throw ConsistencyError("simulate: one noise draw per event is required");
  return run(timeline, params, modes, eta, {}, Engine::ReturnSource::NoiseDraw,
             std::move(initial));
}

namespace {

void observed_series(const ReturnPanel& observed, std::vector<double>& values,
                     std::vector<std::uint8_t>& gaps) {
  if (observed.records.size() != observed.timeline.size())
    throw ConsistencyError("panel has a record count different from its timeline");
  values.resize(observed.records.size());
  gaps.resize(observed.records.size());
  for (std::size_t k = 0; k < observed.records.size(); ++k) {
    values[k] = observed.records[k].return_total;
    gaps[k] = observed.records[k].gap ? 1 : 0;
  }
}

}  // namespace

ReturnPanel decompose(const ReturnPanel& observed, const ModelParams& params,
                      const Modes& modes) {
  std::vector<double> values;
  std::vector<std::uint8_t> gaps;
  observed_series(observed, values, gaps);
  return run(observed.timeline, params, modes, values, gaps, Engine::ReturnSource::Observed,
             std::nullopt);
}

NetworkState state_before(const ReturnPanel& observed, std::size_t seq,
                          const ModelParams& params, const Modes& modes) {
  if (seq >= observed.timeline.size()) throw ConsistencyError("state_before: seq out of range");
  std::vector<double> values;
  std::vector<std::uint8_t> gaps;
  observed_series(observed, values, gaps);
  Engine engine(observed.timeline.universe, params, modes);
  auto state = NetworkState::initial(observed.timeline.universe.size());
  std::vector<StepRecord> scratch;
  const auto& events = observed.timeline.events;
  const double cutoff = events[seq].utc_time;
  const std::span<const MarketEvent> ev(events);
  for_each_batch(events, [&](std::size_t first, std::size_t last) {
    if (events[first].utc_time >= cutoff) return;
    const auto len = last - first;
    engine.advance_batch(state, ev.subspan(first, len),
                         std::span<const double>(values).subspan(first, len),
                         std::span<const std::uint8_t>(gaps).subspan(first, len),
                         Engine::ReturnSource::Observed, scratch);
  });
  return state;
}

}  // namespace tremor

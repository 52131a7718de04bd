#include "tremor/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "tremor/engine.hpp"
#include "tremor/errors.hpp"

namespace tremor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw DomainError("at least two bin edges are required");
  for (std::size_t k = 1; k < edges.size(); ++k)
    if (!(edges[k] > edges[k - 1])) throw DomainError("bin edges must be strictly ascending");
}

// Index of the bin [edges[k], edges[k+1]) holding x, if any.
std::optional<std::size_t> find_bin(std::span<const double> edges, double x) {
  if (x < edges.front() || !(x < edges.back())) return std::nullopt;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

SyncCurve empty_curve(std::span<const double> edges) {
  SyncCurve c;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) c.bins.push_back({edges[k], edges[k + 1]});
  return c;
}

void finish(SyncCurve& c) {
  for (auto& b : c.bins)
    b.probability = b.count > 0 ? static_cast<double>(b.agree) / static_cast<double>(b.count)
                                : kNaN;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double world_return(std::span<const double> returns, std::span<const double> caps,
                    std::optional<std::size_t> exclude) {
  if (returns.size() != caps.size()) throw DomainError("world_return: size mismatch");
  if (returns.size() < 2) throw DomainError("world_return: at least two exchanges are required");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < returns.size(); ++j) {
    if (exclude && *exclude == j) continue;
    if (!(caps[j] > 0.0)) throw DomainError("world_return: capitalizations must be positive");
    if (std::isnan(returns[j])) continue;
    num += caps[j] * returns[j];
    den += caps[j];
  }
  return den > 0.0 ? num / den : kNaN;
}

DailyReturns daily_returns(const ReturnPanel& panel) {
  const auto n = panel.universe().size();
  std::map<std::int64_t, std::vector<double>> open_ret, close_ret;
  for (const auto& r : panel.records) {
    auto& m = r.event.kind == EventKind::Open ? open_ret : close_ret;
    auto& row = m.try_emplace(r.event.day, n, kNaN).first->second;
    if (!r.gap) row[r.event.exchange] = r.return_total;
  }
  DailyReturns out;
  for (const auto& [day, closes] : close_ret) {
    out.days.push_back(day);
    std::vector<double> row(n, kNaN);
    const auto it = open_ret.find(day);
    if (it != open_ret.end())
      for (std::size_t i = 0; i < n; ++i) row[i] = it->second[i] + closes[i];
    out.returns.push_back(std::move(row));
  }
  return out;
}

std::size_t SyncCurve::total() const {
  std::size_t t = 0;
  for (const auto& b : bins) t += b.count;
  return t;
}

std::vector<double> quantile_edges(std::vector<double> magnitudes, std::size_t count) {
  if (count == 0) throw DomainError("quantile_edges: at least one bin is required");
  std::sort(magnitudes.begin(), magnitudes.end());
  std::vector<double> edges{0.0};
  for (std::size_t k = 1; k < count && !magnitudes.empty(); ++k) {
    const double q = magnitudes[k * magnitudes.size() / count];
    if (q > edges.back()) edges.push_back(q);
  }
  edges.push_back(std::numeric_limits<double>::infinity());
  return edges;
}

std::vector<double> world_return_magnitudes(const ReturnPanel& panel,
                                            std::span<const double> caps) {
  const auto daily = daily_returns(panel);
  std::vector<double> out;
  for (const auto& row : daily.returns)
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::isnan(row[i]) || row[i] == 0.0) continue;
      const double rm = world_return(row, caps, i);
      if (std::isnan(rm) || rm == 0.0) continue;
      out.push_back(std::fabs(rm));
    }
  return out;
}

SyncCurve sync_curve(const ReturnPanel& panel, std::span<const double> caps,
                     std::span<const double> bin_edges) {
  check_edges(bin_edges);
  if (caps.size() != panel.universe().size())
    throw DomainError("sync_curve: one capitalization per exchange is required");
  auto curve = empty_curve(bin_edges);
  const auto daily = daily_returns(panel);
  for (const auto& row : daily.returns)
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::isnan(row[i]) || row[i] == 0.0) continue;
      const double rm = world_return(row, caps, i);
      if (std::isnan(rm) || rm == 0.0) continue;
      const auto b = find_bin(bin_edges, std::fabs(rm));
      if (!b) continue;
      auto& bin = curve.bins[*b];
      ++bin.count;
      if (sign_of(row[i]) == sign_of(rm)) ++bin.agree;
    }
  finish(curve);
  return curve;
}

SyncCurve lead_lag_curve(const ReturnPanel& panel, std::size_t mover,
                         std::span<const std::size_t> responders,
                         std::span<const double> bin_edges) {
  check_edges(bin_edges);
  const auto n = panel.universe().size();
  if (mover >= n) throw DomainError("lead_lag_curve: unknown mover");
  // Per responder: (utc_time, record index) of its open events.
  std::vector<std::vector<std::pair<double, std::size_t>>> opens(n);
  for (const auto r : responders) {
    if (r >= n || r == mover) throw DomainError("lead_lag_curve: invalid responder");
  }
  for (std::size_t k = 0; k < panel.records.size(); ++k) {
    const auto& ev = panel.records[k].event;
    if (ev.kind == EventKind::Open) opens[ev.exchange].emplace_back(ev.utc_time, k);
  }

  auto curve = empty_curve(bin_edges);
  for (const auto& rec : panel.records) {
    if (rec.event.exchange != mover || rec.event.kind != EventKind::Close || rec.gap) continue;
    const double move = rec.return_total;
    if (move == 0.0) continue;
    const auto b = find_bin(bin_edges, std::fabs(move));
    if (!b) continue;
    for (const auto r : responders) {
      const auto& list = opens[r];
      auto it = std::lower_bound(list.begin(), list.end(),
                                 std::make_pair(rec.event.utc_time, std::size_t{0}));
      if (it != list.end() && it->first == rec.event.utc_time)
        throw ConsistencyError(fmt::format(
            "lead_lag_curve: {} opens at the same instant the mover closes",
            panel.universe()[r].id));
      if (it == list.end()) continue;
      const auto& resp = panel.records[it->second];
      if (resp.gap || resp.return_total == 0.0) continue;
      auto& bin = curve.bins[*b];
      ++bin.count;
      if (sign_of(resp.return_total) == sign_of(move)) ++bin.agree;
    }
  }
  finish(curve);
  return curve;
}

Sign predict_sign(const NetworkState& state, const MarketEvent& event,
                  const ModelParams& params, const std::vector<Exchange>& universe,
                  const Modes& modes) {
  const auto tr = transfer_return(event.exchange, state, universe, params, modes, event.utc_time);
  if (tr.transfer > 0.0) return Sign::Up;
  if (tr.transfer < 0.0) return Sign::Down;
  return Sign::Abstain;
}

BacktestReport backtest(const ReturnPanel& panel, const ModelParams& params,
                        const Modes& modes) {
  const auto replay = decompose(panel, params, modes);
  BacktestReport rep;
  for (const auto& r : replay.records) {
    if (r.gap) continue;
    ++rep.n_events;
    if (r.transfer == 0.0) continue;
    ++rep.n_predicted;
    if (sign_of(r.transfer) == sign_of(r.return_total)) ++rep.hits;
  }
  if (rep.n_predicted > 0)
    rep.hit_rate = static_cast<double>(rep.hits) / static_cast<double>(rep.n_predicted);
  if (rep.n_events > 0)
    rep.strict_hit_rate = static_cast<double>(rep.hits) / static_cast<double>(rep.n_events);
  return rep;
}

std::vector<TremorPoint> tremor_activity(const ReturnPanel& panel, std::span<const double> caps) {
  if (caps.size() != panel.universe().size())
    throw DomainError("tremor_activity: one capitalization per exchange is required");
  std::map<std::int64_t, double> activity;
  for (const auto& r : panel.records) {
    auto& a = activity[r.event.day];
    if (!r.gap) a += r.transfer;
  }
  const auto daily = daily_returns(panel);
  std::map<std::int64_t, double> world;
  for (std::size_t d = 0; d < daily.days.size(); ++d)
    world[daily.days[d]] = world_return(daily.returns[d], caps);

  std::vector<TremorPoint> out;
  double index = 1.0;
  for (const auto& [day, a] : activity) {
    const auto it = world.find(day);
    if (it != world.end() && !std::isnan(it->second)) index *= std::exp(it->second);
    out.push_back({day, a, index});
  }
  return out;
}

}  // namespace tremor

#include "tremor/types.hpp"

#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "tremor/errors.hpp"

namespace tremor {

double Exchange::session_hours() const {
  double len = close_hour - open_hour;
  if (len <= 0.0) len += 24.0;
  return len;
}

void validate(const Exchange& ex) {
  if (ex.id.empty()) throw DomainError("exchange id must not be empty");
  if (!std::isfinite(ex.capitalization) || ex.capitalization <= 0.0)
    throw DomainError(fmt::format("exchange {}: capitalization must be positive", ex.id));
  if (!std::isfinite(ex.tz_offset) || ex.tz_offset < -12.0 || ex.tz_offset > 14.0)
    throw DomainError(fmt::format("exchange {}: tz_offset must lie in [-12, 14]", ex.id));
  auto hour_ok = [](double h) { return std::isfinite(h) && h >= 0.0 && h < 24.0; };
  if (!hour_ok(ex.open_hour))
    throw DomainError(fmt::format("exchange {}: open_hour must lie in [0, 24)", ex.id));
  if (!hour_ok(ex.close_hour))
    throw DomainError(fmt::format("exchange {}: close_hour must lie in [0, 24)", ex.id));
  if (ex.open_hour == ex.close_hour)
    throw DomainError(fmt::format("exchange {}: open_hour equals close_hour", ex.id));
}

void validate_universe(const std::vector<Exchange>& universe) {
  if (universe.empty()) throw DomainError("universe is empty");
  std::unordered_set<std::string> seen;
  for (const auto& ex : universe) {
    validate(ex);
    if (!seen.insert(ex.id).second)
      throw DomainError(fmt::format("duplicate exchange id {}", ex.id));
  }
}

ModelParams ModelParams::from_variance(double gamma, double tau, double r_c,
                                       double sigma2) {
  if (!(sigma2 >= 0.0)) throw DomainError("variance must be nonnegative");
  return ModelParams{gamma, tau, r_c, std::sqrt(sigma2)};
}

void validate(const ModelParams& p) {
  auto finite = std::isfinite(p.gamma) && std::isfinite(p.tau) &&
                std::isfinite(p.r_c) && std::isfinite(p.sigma);
  if (!finite) throw DomainError("model parameters must be finite");
  if (p.gamma <= 0.0) throw DomainError("gamma must be positive");
  if (p.tau <= 0.0) throw DomainError("tau must be positive");
  if (p.r_c <= 0.0) throw DomainError("r_c must be positive");
  if (p.sigma < 0.0) throw DomainError("sigma must be nonnegative");
}

std::string_view to_string(Sidedness s) {
  return s == Sidedness::TwoSided ? "two-sided" : "one-sided";
}

std::string_view to_string(Normalization n) {
  return n == Normalization::FiredCount ? "fired" : "n-minus-one";
}

Sidedness parse_sidedness(std::string_view s) {
  if (s == "two-sided") return Sidedness::TwoSided;
  if (s == "one-sided") return Sidedness::OneSidedLiteral;
  throw DomainError(fmt::format("unknown sidedness '{}'", s));
}

Normalization parse_normalization(std::string_view s) {
  if (s == "fired") return Normalization::FiredCount;
  if (s == "n-minus-one") return Normalization::UniverseMinusOne;
  throw DomainError(fmt::format("unknown normalization '{}'", s));
}

std::string_view to_string(EventKind k) {
  return k == EventKind::Open ? "open" : "close";
}

std::size_t EventTimeline::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < universe.size(); ++i)
    if (universe[i].id == id) return i;
  throw ConsistencyError(fmt::format("exchange '{}' is not in the universe", id));
}

void validate(const EventTimeline& timeline) {
  validate_universe(timeline.universe);
  const auto n = timeline.universe.size();
  std::vector<int> last_kind(n, -1);
  for (std::size_t k = 0; k < timeline.events.size(); ++k) {
    const auto& e = timeline.events[k];
    if (e.exchange >= n)
      throw ConsistencyError(fmt::format("event {} references exchange index {}", k, e.exchange));
    if (e.seq != k)
      throw ConsistencyError(fmt::format("event {} has seq {}", k, e.seq));
    if (!std::isfinite(e.utc_time))
      throw ConsistencyError(fmt::format("event {} has a non-finite time", k));
    if (k > 0) {
      const auto& p = timeline.events[k - 1];
      const auto& pid = timeline.universe[p.exchange].id;
      const auto& id = timeline.universe[e.exchange].id;
      if (p.utc_time > e.utc_time || (p.utc_time == e.utc_time && pid >= id))
        throw ConsistencyError(fmt::format("events {} and {} are out of order", k - 1, k));
    }
    const int kind = e.kind == EventKind::Open ? 0 : 1;
    if (last_kind[e.exchange] == kind)
      throw ConsistencyError(fmt::format(
          "exchange {}: two consecutive {} events (event {})",
          timeline.universe[e.exchange].id, to_string(e.kind), k));
    last_kind[e.exchange] = kind;
  }
}

NetworkState NetworkState::initial(std::size_t n, double price) {
  NetworkState s;
  s.exchanges.assign(n, ExchangeState{0.0, price, 0.0, false});
  return s;
}

std::vector<double> ReturnPanel::capitalizations() const {
  std::vector<double> caps;
  caps.reserve(universe().size());
  for (const auto& ex : universe()) caps.push_back(ex.capitalization);
  return caps;
}

}  // namespace tremor

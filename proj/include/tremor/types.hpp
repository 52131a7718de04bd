#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tremor {

// One stock exchange. Only ratios of capitalizations matter.
struct Exchange {
  std::string id;
  std::string name;
  double capitalization = 1.0;
  double tz_offset = 0.0;  // hours east of UTC, in [-12, 14]
  double open_hour = 9.0;  // local clock, [0, 24)
  double close_hour = 17.0;

  // Session length in hours, in (0, 24). A close hour before the open hour
  // means the session runs past local midnight.
  double session_hours() const;
};

// Throws DomainError when an exchange violates its invariants.
void validate(const Exchange& ex);

// Throws DomainError on an empty universe, duplicate ids or an invalid member.
void validate_universe(const std::vector<Exchange>& universe);

struct ModelParams {
  double gamma = 0.8;
  double tau = 20.0;
  double r_c = 0.03;
  double sigma = 0.024494897427831779;  // sqrt(0.0006)

  static ModelParams from_variance(double gamma, double tau, double r_c,
                                   double sigma2);
  double variance() const { return sigma * sigma; }
};

void validate(const ModelParams& p);

enum class Sidedness { TwoSided, OneSidedLiteral };

// Divisor of the transfer term: the number of fired neighbours, or N-1.
enum class Normalization { FiredCount, UniverseMinusOne };

struct Modes {
  Sidedness sidedness = Sidedness::TwoSided;
  Normalization normalization = Normalization::FiredCount;
};

std::string_view to_string(Sidedness s);
std::string_view to_string(Normalization n);
Sidedness parse_sidedness(std::string_view s);
Normalization parse_normalization(std::string_view s);

enum class EventKind { Open, Close };

std::string_view to_string(EventKind k);

struct MarketEvent {
  std::size_t exchange = 0;  // index into the universe
  EventKind kind = EventKind::Open;
  double utc_time = 0.0;     // hours since 1970-01-01T00:00Z
  std::int64_t day = 0;      // trading-session date, days since epoch
  std::size_t seq = 0;
};

// Globally ordered open/close events over a fixed universe.
struct EventTimeline {
  std::vector<Exchange> universe;
  std::vector<MarketEvent> events;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  std::size_t index_of(std::string_view id) const;  // throws ConsistencyError
};

// Checks ordering by (utc_time, exchange id), consecutive seq, exchange
// indices in range and Open/Close alternation per exchange.
void validate(const EventTimeline& timeline);

struct ExchangeState {
  double r_cum = 0.0;
  double last_price = 100.0;
  double last_event_time = 0.0;
  bool has_event = false;
};

struct NetworkState {
  std::vector<ExchangeState> exchanges;

  static NetworkState initial(std::size_t n, double price = 100.0);
};

// One fired neighbour's share of a transfer term.
struct Contribution {
  std::size_t exchange = 0;
  double value = 0.0;  // alpha * beta * r_cum / divisor
  double r_cum = 0.0;  // stress consumed
  double lag = 0.0;    // hours between release and pricing
};

struct StepRecord {
  MarketEvent event;
  double return_total = 0.0;
  double transfer = 0.0;
  double eta = 0.0;
  std::size_t n_star = 0;
  std::vector<Contribution> contributors;
  bool gap = false;  // no observation for this event
};

// Event-aligned returns and their transfer/noise decomposition.
struct ReturnPanel {
  EventTimeline timeline;
  std::vector<StepRecord> records;

  const std::vector<Exchange>& universe() const { return timeline.universe; }
  std::vector<double> capitalizations() const;
};

}  // namespace tremor

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tremor/types.hpp"

namespace tremor {

using Date = std::chrono::sys_days;

Date parse_iso_date(std::string_view text);  // throws ParseError
std::string format_iso_date(Date d);
inline std::int64_t day_number(Date d) { return d.time_since_epoch().count(); }
inline Date date_from_day(std::int64_t day) { return Date{std::chrono::days{day}}; }

// `count` consecutive Monday-to-Friday dates starting at or after `start`.
std::vector<Date> weekdays(Date start, std::size_t count);

struct UniverseConfig {
  std::vector<Exchange> exchanges;
  Date start_date{std::chrono::year{2000} / 1 / 3};
  std::size_t days = 250;
  std::string calendar = "weekdays";
};

// INI-style file: an optional [universe] section (start_date, days,
// calendar) and one [exchange:<ID>] section per exchange with name,
// capitalization, tz_offset, open_hour and close_hour.
UniverseConfig parse_universe(const std::filesystem::path& path);
UniverseConfig parse_universe(std::istream& in, std::string_view source = "<stream>");
void write_universe(std::ostream& out, const UniverseConfig& config);

struct PriceRow {
  std::string exchange_id;
  Date date;
  double open = 0.0;
  double close = 0.0;
};

// CSV with header exchange_id,date,open,close. Every rejected row is listed
// in the thrown ParseError. Result is sorted by (universe order, date).
std::vector<PriceRow> parse_prices(const std::filesystem::path& path,
                                   const UniverseConfig& config);
std::vector<PriceRow> parse_prices(std::istream& in, const UniverseConfig& config,
                                   std::string_view source = "<stream>");
void write_prices(std::ostream& out, const std::vector<PriceRow>& rows);

// Open and close events for every exchange and date, globally ordered by
// UTC time with ties broken by exchange id.
EventTimeline build_timeline(const std::vector<Exchange>& universe,
                             const std::vector<Date>& dates);

// Timeline over the union of dates present in `rows`.
EventTimeline timeline_from_prices(const std::vector<Exchange>& universe,
                                   const std::vector<PriceRow>& rows);

// Close events carry log(close/open) of the same day, open events
// log(open/previous available close). Missing observations become gaps.
ReturnPanel panel_from_prices(const std::vector<PriceRow>& rows,
                              const EventTimeline& timeline);

struct SyntheticData {
  std::vector<PriceRow> prices;
  ReturnPanel panel;
};

// Simulates the network over `days` weekdays from config.start_date with
// every price path starting at 100.
SyntheticData generate_synthetic(const UniverseConfig& config, const ModelParams& params,
                                 std::size_t days, std::uint64_t seed,
                                 const Modes& modes = {});

// Event-level panel as CSV:
// seq,exchange_id,kind,utc_time,date,return,transfer,eta,n_star,gap
void write_panel(std::ostream& out, const ReturnPanel& panel);

}  // namespace tremor

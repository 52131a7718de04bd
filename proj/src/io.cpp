#include "tremor/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "tremor/engine.hpp"
#include "tremor/errors.hpp"

namespace tremor {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

Date parse_iso_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& v) {
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    return ec == std::errc{} && p == text.data() + pos + len;
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !num(0, 4, y) ||
      !num(5, 2, m) || !num(8, 2, d))
    throw ParseError(fmt::format("malformed date '{}' (expected YYYY-MM-DD)", text));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw ParseError(fmt::format("invalid calendar date '{}'", text));
  return Date{ymd};
}

std::string format_iso_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::vector<Date> weekdays(Date start, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  for (Date d = start; out.size() < count; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Universe config

UniverseConfig parse_universe(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_universe(in, path.string());
}

UniverseConfig parse_universe(std::istream& in, std::string_view source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }

  UniverseConfig cfg;
  constexpr std::string_view prefix = "exchange:";
  std::set<std::string> ids;
  for (const auto& [section, body] : tree) {
    if (section == "universe") {
      for (const auto& [key, value] : body) {
        const auto& v = value.data();
        if (key == "start_date") {
          try {
            cfg.start_date = parse_iso_date(v);
          } catch (const ParseError& e) {
            throw ParseError(fmt::format("{}: [universe] field start_date: {}", source, e.what()));
          }
        } else if (key == "days") {
          double days = 0;
          if (!parse_double(v, days) || days < 1 || days != std::floor(days))
            throw ParseError(fmt::format("{}: [universe] field days: expected a positive integer, got '{}'", source, v));
          cfg.days = static_cast<std::size_t>(days);
        } else if (key == "calendar") {
          if (v != "weekdays")
            throw ParseError(fmt::format("{}: [universe] field calendar: only 'weekdays' is supported", source));
          cfg.calendar = v;
        } else {
          throw ParseError(fmt::format("{}: [universe] unknown field '{}'", source, key));
        }
      }
      continue;
    }
    if (!section.starts_with(prefix))
      throw ParseError(fmt::format("{}: unknown section [{}]", source, section));

    Exchange ex;
    ex.id = std::string(trim(std::string_view(section).substr(prefix.size())));
    if (ex.id.empty()) throw ParseError(fmt::format("{}: section [{}] has an empty id", source, section));
    if (!ids.insert(ex.id).second)
      throw ParseError(fmt::format("{}: duplicate exchange id '{}' in section [{}]", source, ex.id, section));
    ex.name = ex.id;

    auto number = [&](std::string_view field, double& out) {
      auto child = body.get_child_optional(std::string(field));
      if (!child)
        throw ParseError(fmt::format("{}: [{}] missing field {}", source, section, field));
      if (!parse_double(child->data(), out))
        throw ParseError(fmt::format("{}: [{}] field {}: malformed number '{}'", source, section,
                                     field, child->data()));
    };
    for (const auto& [key, value] : body) {
      static const std::set<std::string> known = {"name", "capitalization", "tz_offset",
                                                  "open_hour", "close_hour"};
      if (!known.contains(key))
        throw ParseError(fmt::format("{}: [{}] unknown field '{}'", source, section, key));
    }
    if (auto name = body.get_optional<std::string>("name")) ex.name = *name;
    number("capitalization", ex.capitalization);
    number("tz_offset", ex.tz_offset);
    number("open_hour", ex.open_hour);
    number("close_hour", ex.close_hour);
    if (ex.capitalization <= 0.0)
      throw ParseError(fmt::format("{}: [{}] field capitalization: capitalization must be positive",
                                   source, section));
    try {
      validate(ex);
    } catch (const DomainError& e) {
      throw ParseError(fmt::format("{}: [{}] {}", source, section, e.what()));
    }
    cfg.exchanges.push_back(std::move(ex));
  }
  if (cfg.exchanges.size() < 2)
    throw ParseError(fmt::format("{}: at least two exchanges are required", source));
  return cfg;
}

void write_universe(std::ostream& out, const UniverseConfig& config) {
  out << "[universe]\n"
      << "start_date = " << format_iso_date(config.start_date) << "\n"
      << "days = " << config.days << "\n"
      << "calendar = " << config.calendar << "\n";
  for (const auto& ex : config.exchanges) {
    out << fmt::format(
        "\n[exchange:{}]\nname = {}\ncapitalization = {}\ntz_offset = {}\nopen_hour = {}\n"
        "close_hour = {}\n",
        ex.id, ex.name, ex.capitalization, ex.tz_offset, ex.open_hour, ex.close_hour);
  }
}

// ---------------------------------------------------------------------------
// Prices

std::vector<PriceRow> parse_prices(const std::filesystem::path& path,
                                   const UniverseConfig& config) {
  auto in = open_input(path);
  return parse_prices(in, config, path.string());
}

std::vector<PriceRow> parse_prices(std::istream& in, const UniverseConfig& config,
                                   std::string_view source) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < config.exchanges.size(); ++i) index[config.exchanges[i].id] = i;

  std::vector<std::string> problems;
  std::vector<std::pair<std::size_t, PriceRow>> rows;
  std::set<std::pair<std::string, std::int64_t>> seen;

  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto f = split_csv(text);
    if (!header) {
      if (f.size() != 4 || f[0] != "exchange_id" || f[1] != "date" || f[2] != "open" ||
          f[3] != "close")
        throw ParseError(fmt::format("{}:{}: expected header exchange_id,date,open,close", source, lineno));
      header = true;
      continue;
    }
    auto reject = [&](std::string msg) {
      problems.push_back(fmt::format("{}:{}: {}", source, lineno, msg));
    };
    if (f.size() != 4) {
      reject(fmt::format("expected 4 fields, found {}", f.size()));
      continue;
    }
    PriceRow row;
    row.exchange_id = std::string(f[0]);
    const auto it = index.find(row.exchange_id);
    if (it == index.end()) {
      reject(fmt::format("unknown exchange_id '{}'", row.exchange_id));
      continue;
    }
    try {
      row.date = parse_iso_date(f[1]);
    } catch (const ParseError& e) {
      reject(fmt::format("field date: {}", e.what()));
      continue;
    }
    if (!parse_double(f[2], row.open) || row.open <= 0.0) {
      reject(fmt::format("field open: price must be positive, got '{}'", f[2]));
      continue;
    }
    if (!parse_double(f[3], row.close) || row.close <= 0.0) {
      reject(fmt::format("field close: price must be positive, got '{}'", f[3]));
      continue;
    }
    if (!seen.emplace(row.exchange_id, day_number(row.date)).second) {
      reject(fmt::format("duplicate row for ({}, {})", row.exchange_id, f[1]));
      continue;
    }
    rows.emplace_back(it->second, std::move(row));
  }
  if (!header) throw ParseError(fmt::format("{}: empty price file", source));
  if (!problems.empty()) {
    std::string msg = fmt::format("{}: {} rejected row(s)", source, problems.size());
    for (const auto& p : problems) msg += "\n  " + p;
    throw ParseError(msg);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second.date < b.second.date;
  });
  std::vector<PriceRow> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(r.second));
  return out;
}

void write_prices(std::ostream& out, const std::vector<PriceRow>& rows) {
  out << "exchange_id,date,open,close\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{}\n", r.exchange_id, format_iso_date(r.date), r.open, r.close);
}

// ---------------------------------------------------------------------------
// Timeline and panels

EventTimeline build_timeline(const std::vector<Exchange>& universe,
                             const std::vector<Date>& dates) {
  validate_universe(universe);
  EventTimeline tl;
  tl.universe = universe;
  tl.events.reserve(universe.size() * dates.size() * 2);
  for (const auto& date : dates) {
    const auto day = day_number(date);
    for (std::size_t i = 0; i < universe.size(); ++i) {
      const auto& ex = universe[i];
      const double open = static_cast<double>(day) * 24.0 + ex.open_hour - ex.tz_offset;
      tl.events.push_back({i, EventKind::Open, open, day, 0});
      tl.events.push_back({i, EventKind::Close, open + ex.session_hours(), day, 0});
    }
  }
  std::sort(tl.events.begin(), tl.events.end(), [&](const MarketEvent& a, const MarketEvent& b) {
    if (a.utc_time != b.utc_time) return a.utc_time < b.utc_time;
    return universe[a.exchange].id < universe[b.exchange].id;
  });
  for (std::size_t k = 0; k < tl.events.size(); ++k) tl.events[k].seq = k;
  try {
    validate(tl);
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(fmt::format("invalid session configuration: {}", e.what()));
  }
  return tl;
}

EventTimeline timeline_from_prices(const std::vector<Exchange>& universe,
                                   const std::vector<PriceRow>& rows) {
  std::set<Date> dates;
  for (const auto& r : rows) dates.insert(r.date);
  return build_timeline(universe, {dates.begin(), dates.end()});
}

ReturnPanel panel_from_prices(const std::vector<PriceRow>& rows, const EventTimeline& timeline) {
  const auto n = timeline.universe.size();
  // Per exchange: day -> (open, close), ordered by day.
  std::vector<std::map<std::int64_t, std::pair<double, double>>> by_day(n);
  for (const auto& r : rows)
    by_day[timeline.index_of(r.exchange_id)][day_number(r.date)] = {r.open, r.close};

  ReturnPanel panel;
  panel.timeline = timeline;
  panel.records.reserve(timeline.size());
  for (const auto& ev : timeline.events) {
    StepRecord rec;
    rec.event = ev;
    rec.gap = true;
    const auto& days = by_day[ev.exchange];
    const auto it = days.find(ev.day);
    if (it != days.end()) {
      const auto [open, close] = it->second;
      if (ev.kind == EventKind::Close) {
        rec.return_total = std::log(close / open);
        rec.gap = false;
      } else if (it != days.begin()) {
        const double prev_close = std::prev(it)->second.second;
        rec.return_total = std::log(open / prev_close);
        rec.gap = false;
      }
    }
    rec.eta = rec.return_total;
    panel.records.push_back(std::move(rec));
  }
  return panel;
}

SyntheticData generate_synthetic(const UniverseConfig& config, const ModelParams& params,
                                 std::size_t days, std::uint64_t seed, const Modes& modes) {
  const auto timeline = build_timeline(config.exchanges, weekdays(config.start_date, days));
  SyntheticData out;
  out.panel = simulate(timeline, params, seed, modes);

  const auto n = config.exchanges.size();
  std::vector<double> price(n, 100.0);
  // (exchange, day) -> row index
  std::map<std::pair<std::size_t, std::int64_t>, PriceRow> rows;
  for (const auto& rec : out.panel.records) {
    const auto i = rec.event.exchange;
    price[i] *= std::exp(rec.return_total);
    auto& row = rows[{i, rec.event.day}];
    row.exchange_id = config.exchanges[i].id;
    row.date = date_from_day(rec.event.day);
    (rec.event.kind == EventKind::Open ? row.open : row.close) = price[i];
  }
  out.prices.reserve(rows.size());
  for (auto& [key, row] : rows) out.prices.push_back(std::move(row));
  return out;
}

void write_panel(std::ostream& out, const ReturnPanel& panel) {
  out << "seq,exchange_id,kind,utc_time,date,return,transfer,eta,n_star,gap\n";
  for (const auto& r : panel.records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.event.seq,
                       panel.universe()[r.event.exchange].id, to_string(r.event.kind),
                       r.event.utc_time, format_iso_date(date_from_day(r.event.day)),
                       r.return_total, r.transfer, r.eta, r.n_star, r.gap ? 1 : 0);
  }
}

}  // namespace tremor

#include "tremor/report.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "tremor/io.hpp"

namespace tremor {

using nlohmann::json;

namespace {

// NaN and infinities become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string_view to_string(LikelihoodMode m) {
  return m == LikelihoodMode::FilteredBins ? "filtered" : "full";
}

std::string_view to_string(GammaMethod m) {
  return m == GammaMethod::Profile ? "profile" : "closed-form";
}

}  // namespace

json to_json(const ModelParams& p) {
  return {{"gamma", number(p.gamma)},
          {"tau", number(p.tau)},
          {"r_c", number(p.r_c)},
          {"sigma", number(p.sigma)},
          {"sigma2", number(p.variance())}};
}

json to_json(const Modes& m) {
  return {{"sidedness", to_string(m.sidedness)}, {"normalization", to_string(m.normalization)}};
}

json to_json(const Histogram& h) {
  json bins = json::array();
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    bins.push_back({{"lo", h.lower(k)},
                    {"hi", h.upper(k)},
                    {"count", h.counts[k]},
                    {"included", static_cast<bool>(h.included[k])}});
  return {{"bin_width", h.bin_width}, {"bins", std::move(bins)}};
}

json to_json(const GaussianFit& fit) {
  return {{"mean", number(fit.mean)},
          {"variance", number(fit.variance)},
          {"degenerate", fit.degenerate},
          {"ks_statistic", number(fit.ks.statistic)},
          {"ks_p_value", number(fit.ks.p_value)},
          {"n_total", fit.n_total},
          {"n_used", fit.n_used},
          {"histogram", to_json(fit.histogram)}};
}

json to_json(const CalibrationResult& r) {
  json points = json::array();
  for (const auto& p : r.points)
    points.push_back({{"r_c", p.r_c},
                      {"tau", p.tau},
                      {"sigma", p.sigma},
                      {"sigma2", p.sigma * p.sigma},
                      {"identifiable", p.identifiable},
                      {"diagnostic", p.diagnostic},
                      {"gamma", number(p.gamma)},
                      {"gamma_closed_form", number(p.gamma_closed_form)},
                      {"closed_form_converged", p.closed_form_converged},
                      {"closed_form_iterations", p.closed_form_iterations},
                      {"gamma_profile", number(p.gamma_profile)},
                      {"log_likelihood", number(p.log_likelihood)}});
  const auto& best = r.points[r.best_index];
  return {{"params", to_json(r.params)},
          {"log_likelihood", number(r.log_likelihood)},
          {"best_index", r.best_index},
          {"gamma_closed_form", number(best.gamma_closed_form)},
          {"gamma_profile", number(best.gamma_profile)},
          {"gamma_discrepancy", number(best.gamma_closed_form - best.gamma_profile)},
          {"options",
           {{"modes", to_json(r.options.modes)},
            {"likelihood", to_string(r.options.likelihood)},
            {"gamma_method", to_string(r.options.gamma_method)},
            {"min_occupancy", r.options.min_occupancy},
            {"bin_width_factor", r.options.bin_width_factor}}},
          {"n_residuals", r.residuals.size()},
          {"fit", to_json(r.fit)},
          {"grid", std::move(points)}};
}

json to_json(const BacktestReport& b) {
  return {{"n_events", b.n_events},
          {"n_predicted", b.n_predicted},
          {"hits", b.hits},
          {"hit_rate", number(b.hit_rate)},
          {"strict_hit_rate", number(b.strict_hit_rate)}};
}

json to_json(const SyncCurve& curve) {
  json bins = json::array();
  for (const auto& b : curve.bins)
    bins.push_back({{"bin_lo", number(b.lo)},
                    {"bin_hi", number(b.hi)},
                    {"probability", b.defined() ? number(b.probability) : json(nullptr)},
                    {"count", b.count}});
  return {{"bins", std::move(bins)}, {"total", curve.total()}};
}

json to_json(const std::vector<TremorPoint>& series) {
  json rows = json::array();
  for (const auto& p : series)
    rows.push_back({{"date", format_iso_date(date_from_day(p.day))},
                    {"a_value", p.a_value},
                    {"world_index", p.world_index}});
  return rows;
}

void write_sync_csv(std::ostream& out, const SyncCurve& curve) {
  out << "bin_lo,bin_hi,probability,count\n";
  for (const auto& b : curve.bins) {
    const auto prob = b.defined() ? fmt::format("{}", b.probability) : std::string{};
    out << fmt::format("{},{},{},{}\n", b.lo, b.hi, prob, b.count);
  }
}

void write_tremor_csv(std::ostream& out, const std::vector<TremorPoint>& series) {
  out << "date,a_value,world_index\n";
  for (const auto& p : series)
    out << fmt::format("{},{},{}\n", format_iso_date(date_from_day(p.day)), p.a_value,
                       p.world_index);
}

}  // namespace tremor

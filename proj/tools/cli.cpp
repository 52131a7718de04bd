#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tremor/analysis.hpp"
#include "tremor/calibration.hpp"
#include "tremor/engine.hpp"
#include "tremor/errors.hpp"
#include "tremor/io.hpp"
#include "tremor/report.hpp"

#ifndef TREMOR_VERSION
#define TREMOR_VERSION "0.0.0"
#endif

namespace tremor::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ParamFlags {
  double gamma = 0.8;
  double tau = 20.0;
  double r_c = 0.03;
  double sigma2 = 0.0006;
  std::string sidedness = "two-sided";
  std::string normalization = "fired";

  ModelParams params() const {
    auto p = ModelParams::from_variance(gamma, tau, r_c, sigma2);
    validate(p);
    return p;
  }
  Modes modes() const { return {parse_sidedness(sidedness), parse_normalization(normalization)}; }

  void attach(CLI::App* cmd, bool with_params) {
    if (with_params) {
      cmd->add_option("--gamma", gamma, "capitalization dominance scale")->capture_default_str();
      cmd->add_option("--tau", tau, "time-zone decay scale in hours")->capture_default_str();
      cmd->add_option("--r-c", r_c, "cumulative-return threshold")->capture_default_str();
      cmd->add_option("--sigma2", sigma2, "variance of local news")->capture_default_str();
    }
    cmd->add_option("--sidedness", sidedness, "threshold test")
        ->check(CLI::IsMember({"two-sided", "one-sided"}))
        ->capture_default_str();
    cmd->add_option("--normalization", normalization, "transfer divisor")
        ->check(CLI::IsMember({"fired", "n-minus-one"}))
        ->capture_default_str();
  }
};

struct Inputs {
  UniverseConfig config;
  ReturnPanel panel;
};

Inputs load(const std::string& config_path, const std::string& prices_path) {
  Inputs in;
  in.config = parse_universe(config_path);
  const auto rows = parse_prices(prices_path, in.config);
  if (rows.empty()) throw ParseError(fmt::format("{}: no price rows", prices_path));
  const auto timeline = timeline_from_prices(in.config.exchanges, rows);
  in.panel = panel_from_prices(rows, timeline);
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(fmt::format("cannot write '{}'", path.string()));
  out << content;
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ParseError(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  return out;
}

void write_manifest(const fs::path& out, const std::string& subcommand,
                    const std::vector<std::string>& args, json details,
                    const std::vector<std::string>& outputs) {
  json m = {{"tool", "tremor"},
            {"version", TREMOR_VERSION},
            {"subcommand", subcommand},
            {"args", args},
            {"output_dir", out.string()},
            {"outputs", outputs}};
  for (auto& [k, v] : details.items()) m[k] = v;
  write_file(out / "manifest.json", m.dump(2) + "\n");
}

std::vector<double> sqrt_all(std::vector<double> v) {
  for (auto& x : v) {
    if (!(x >= 0.0)) throw DomainError(fmt::format("variance {} must be nonnegative", x));
    x = std::sqrt(x);
  }
  return v;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Threshold-coupled network model of world stock exchanges", "tremor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TREMOR_VERSION);

  // generate / simulate
  std::string config_path, prices_path, out_dir;
  std::uint64_t seed = 1;
  std::size_t days = 0;
  ParamFlags flags;

  auto* gen = app.add_subcommand("generate", "simulate the network and write a prices CSV");
  auto* sim = app.add_subcommand("simulate", "simulate the network and write the event panel");
  for (auto* cmd : {gen, sim}) {
    cmd->add_option("--config", config_path, "universe config")->required();
    cmd->add_option("--days", days, "trading days (default: from config)");
    cmd->add_option("--seed", seed, "noise seed")->capture_default_str();
    cmd->add_option("--out", out_dir, "output directory")->required();
    flags.attach(cmd, true);
  }

  // calibrate
  std::vector<double> grid_rc{0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05};
  std::vector<double> grid_tau{5, 10, 20, 40, 80};
  std::vector<double> grid_sigma2{0.0002, 0.0003, 0.0004, 0.0005, 0.0006,
                                  0.0007, 0.0008, 0.0009, 0.001};
  std::string likelihood = "filtered", gamma_method = "profile";
  std::size_t min_occupancy = 10;
  auto* cal = app.add_subcommand("calibrate", "grid-search maximum-likelihood calibration");
  cal->add_option("--config", config_path, "universe config")->required();
  cal->add_option("--prices", prices_path, "prices CSV")->required();
  cal->add_option("--out", out_dir, "output directory")->required();
  cal->add_option("--grid-rc", grid_rc, "threshold values")->delimiter(',')->capture_default_str();
  cal->add_option("--grid-tau", grid_tau, "tau values (hours)")->delimiter(',')->capture_default_str();
  cal->add_option("--grid-sigma2", grid_sigma2, "noise variances")->delimiter(',')->capture_default_str();
  cal->add_option("--likelihood", likelihood, "residual likelihood")
      ->check(CLI::IsMember({"filtered", "full"}))
      ->capture_default_str();
  cal->add_option("--gamma-method", gamma_method, "gamma estimate used for scoring")
      ->check(CLI::IsMember({"profile", "closed-form"}))
      ->capture_default_str();
  cal->add_option("--min-occupancy", min_occupancy, "histogram occupancy threshold")
      ->capture_default_str();
  flags.attach(cal, false);

  // analyze
  std::string which;
  std::vector<double> bins;
  std::size_t quantiles = 10;
  std::string mover = "US";
  std::vector<std::string> groups;
  auto* ana = app.add_subcommand("analyze", "synchronization, lead-lag and tremor analyses");
  ana->add_option("--config", config_path, "universe config")->required();
  ana->add_option("--prices", prices_path, "prices CSV")->required();
  ana->add_option("--out", out_dir, "output directory")->required();
  ana->add_option("--which", which, "analysis")
      ->required()
      ->check(CLI::IsMember({"sync", "leadlag", "tremor"}));
  ana->add_option("--bins", bins, "fixed bin edges (default: equal-count quantiles)")
      ->delimiter(',');
  ana->add_option("--quantiles", quantiles, "number of quantile bins")->capture_default_str();
  ana->add_option("--mover", mover, "lead-lag mover exchange id")->capture_default_str();
  ana->add_option("--group", groups, "lead-lag responder group NAME=ID,ID,...");
  flags.attach(ana, true);

  // backtest
  auto* bt = app.add_subcommand("backtest", "ex-ante sign prediction from the transfer term");
  bt->add_option("--config", config_path, "universe config")->required();
  bt->add_option("--prices", prices_path, "prices CSV")->required();
  bt->add_option("--out", out_dir, "output directory")->required();
  flags.attach(bt, true);

  // rerun
  std::string manifest_path, out_override;
  auto* rerun = app.add_subcommand("rerun", "repeat the run recorded in a manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun->add_option("--out", out_override, "write to a different output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    err << TREMOR_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tremor: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed() || sim->parsed()) {
      const auto config = parse_universe(config_path);
      const auto params = flags.params();
      const auto modes = flags.modes();
      const auto n_days = days > 0 ? days : config.days;
      const auto data = generate_synthetic(config, params, n_days, seed, modes);
      const auto out = prepare_out(out_dir);
      std::string name;
      if (gen->parsed()) {
        name = "prices.csv";
        write_file(out / name, render([&](std::ostream& os) { write_prices(os, data.prices); }));
      } else {
        name = "panel.csv";
        write_file(out / name, render([&](std::ostream& os) { write_panel(os, data.panel); }));
      }
      write_manifest(out, gen->parsed() ? "generate" : "simulate", args,
                     {{"inputs", {{"config", config_path}}},
                      {"params", to_json(params)},
                      {"modes", to_json(modes)},
                      {"seed", seed},
                      {"days", n_days}},
                     {name});
      return kExitOk;
    }

    if (cal->parsed()) {
      const auto in = load(config_path, prices_path);
      CalibrationGrid grid{grid_rc, grid_tau, sqrt_all(grid_sigma2)};
      CalibrationOptions opts;
      opts.modes = flags.modes();
      opts.likelihood = likelihood == "full" ? LikelihoodMode::FullSample : LikelihoodMode::FilteredBins;
      opts.gamma_method = gamma_method == "profile" ? GammaMethod::Profile : GammaMethod::ClosedForm;
      opts.min_occupancy = min_occupancy;
      const auto result = grid_calibrate(in.panel, grid, opts);
      const auto out = prepare_out(out_dir);
      write_file(out / "calibration.json", to_json(result).dump(2) + "\n");
      write_manifest(out, "calibrate", args,
                     {{"inputs", {{"config", config_path}, {"prices", prices_path}}},
                      {"grid", {{"r_c", grid_rc}, {"tau", grid_tau}, {"sigma2", grid_sigma2}}},
                      {"modes", to_json(opts.modes)}},
                     {"calibration.json"});
      return kExitOk;
    }

    if (ana->parsed()) {
      const auto in = load(config_path, prices_path);
      const auto caps = in.panel.capitalizations();
      const auto out = prepare_out(out_dir);
      std::vector<std::string> outputs;
      auto emit = [&](const std::string& stem, const SyncCurve& curve) {
        write_file(out / (stem + ".csv"), render([&](std::ostream& os) { write_sync_csv(os, curve); }));
        write_file(out / (stem + ".json"), to_json(curve).dump(2) + "\n");
        outputs.push_back(stem + ".csv");
        outputs.push_back(stem + ".json");
      };
      if (which == "sync") {
        const auto edges = bins.empty()
                               ? quantile_edges(world_return_magnitudes(in.panel, caps), quantiles)
                               : bins;
        emit("sync", sync_curve(in.panel, caps, edges));
      } else if (which == "leadlag") {
        if (groups.empty()) throw DomainError("leadlag needs at least one --group NAME=ID,...");
        const auto mover_idx = in.panel.timeline.index_of(mover);
        std::vector<double> edges = bins;
        if (edges.empty()) {
          std::vector<double> mags;
          for (const auto& r : in.panel.records)
            if (r.event.exchange == mover_idx && r.event.kind == EventKind::Close && !r.gap &&
                r.return_total != 0.0)
              mags.push_back(std::fabs(r.return_total));
          edges = quantile_edges(mags, quantiles);
        }
        for (const auto& g : groups) {
          const auto eq = g.find('=');
          if (eq == std::string::npos || eq == 0)
            throw DomainError(fmt::format("malformed --group '{}' (expected NAME=ID,ID,...)", g));
          std::vector<std::size_t> members;
          std::stringstream ids(g.substr(eq + 1));
          for (std::string id; std::getline(ids, id, ',');)
            members.push_back(in.panel.timeline.index_of(id));
          emit("leadlag_" + g.substr(0, eq), lead_lag_curve(in.panel, mover_idx, members, edges));
        }
      } else {
        const auto decomposed = decompose(in.panel, flags.params(), flags.modes());
        const auto series = tremor_activity(decomposed, caps);
        write_file(out / "tremor.csv", render([&](std::ostream& os) { write_tremor_csv(os, series); }));
        write_file(out / "tremor.json", to_json(series).dump(2) + "\n");
        outputs = {"tremor.csv", "tremor.json"};
      }
      write_manifest(out, "analyze", args,
                     {{"inputs", {{"config", config_path}, {"prices", prices_path}}},
                      {"which", which},
                      {"params", to_json(flags.params())},
                      {"modes", to_json(flags.modes())}},
                     outputs);
      return kExitOk;
    }

    if (bt->parsed()) {
      const auto in = load(config_path, prices_path);
      const auto report = backtest(in.panel, flags.params(), flags.modes());
      const auto out = prepare_out(out_dir);
      write_file(out / "backtest.json", to_json(report).dump(2) + "\n");
      write_manifest(out, "backtest", args,
                     {{"inputs", {{"config", config_path}, {"prices", prices_path}}},
                      {"params", to_json(flags.params())},
                      {"modes", to_json(flags.modes())}},
                     {"backtest.json"});
      return kExitOk;
    }

    if (rerun->parsed()) {
      std::ifstream mf(manifest_path);
      if (!mf) throw ParseError(fmt::format("cannot open '{}'", manifest_path));
      json manifest;
      try {
        manifest = json::parse(mf);
      } catch (const json::exception& e) {
        throw ParseError(fmt::format("{}: {}", manifest_path, e.what()));
      }
      auto replay = manifest.at("args").get<std::vector<std::string>>();
      if (!replay.empty() && replay.front() == "rerun")
        throw ParseError("a manifest cannot point at another rerun");
      if (!out_override.empty()) {
        const auto it = std::find(replay.begin(), replay.end(), "--out");
        if (it == replay.end() || std::next(it) == replay.end())
          throw ParseError(fmt::format("{}: recorded arguments have no --out", manifest_path));
        *std::next(it) = out_override;
      }
      return run(replay, err);
    }
  } catch (const EstimationError& e) {
    err << "tremor: estimation failed: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    err << "tremor: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tremor::cli

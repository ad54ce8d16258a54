// matnet command-line driver: cluster, simulate, history-match, forecast,
// make-synthetic. Every command reads one JSON config and writes CSV outputs
// plus manifest.json into --out.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "matnet/clustering/elbow.hpp"
#include "matnet/clustering/kprototypes.hpp"
#include "matnet/clustering/temporal.hpp"
#include "matnet/clustering/zone_map.hpp"
#include "matnet/csv.hpp"
#include "matnet/error.hpp"
#include "matnet/io.hpp"
#include "matnet/kernels.hpp"
#include "matnet/manifest.hpp"
#include "matnet/synthetic.hpp"

namespace fs = std::filesystem;
using matnet::io::json;
using namespace matnet;

namespace {

enum class Verbosity { Quiet, Info, Debug };

Verbosity verbosity() {
  const char* v = std::getenv("MATNET_LOG");
  if (!v) return Verbosity::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return Verbosity::Quiet;
  if (s == "debug" || s == "2") return Verbosity::Debug;
  return Verbosity::Info;
}

void info(const std::string& msg) {
  if (verbosity() != Verbosity::Quiet) std::cerr << "matnet: " << msg << "\n";
}
void debug(const std::string& msg) {
  if (verbosity() == Verbosity::Debug) std::cerr << "matnet: " << msg << "\n";
}

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

/// Loaded config plus helpers that resolve paths against its directory.
struct Context {
  fs::path config_path;
  json cfg;
  fs::path out;
  std::uint64_t seed = 0;
  RunManifest manifest;

  Context(const std::string& command, const Common& c, const std::vector<std::string>& keys)
      : config_path(c.config), cfg(io::load_config(c.config)), out(c.out), manifest(command, c.config, 0) {
    io::check_keys(cfg, keys, config_path.string());
    if (cfg.contains("seed")) {
      if (!cfg["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
      seed = cfg["seed"].get<std::uint64_t>();
    }
    if (c.seed) seed = *c.seed;
    manifest = RunManifest(command, c.config, seed);
    fs::create_directories(out);
  }

  fs::path input(const std::string& key) {
    if (!cfg.contains(key) || !cfg[key].is_string()) throw ConfigError("config: '" + key + "' must be a file path");
    return file(cfg[key].get<std::string>());
  }
  fs::path file(const std::string& rel) {
    fs::path p(rel);
    if (p.is_relative()) p = config_path.parent_path() / p;
    if (!fs::exists(p)) throw ConfigError("input file not found: " + p.string());
    manifest.add_input(p);
    return p;
  }
  const json& section(const std::string& key) const {
    static const json null;
    return cfg.contains(key) ? cfg[key] : null;
  }
  void finish() { manifest.write(out); }
};

std::vector<std::string> string_list(const json& j, const std::string& what) {
  std::vector<std::string> v;
  if (j.is_null()) return v;
  if (!j.is_array()) throw ConfigError(what + " must be an array of strings");
  for (const auto& e : j) {
    if (!e.is_string()) throw ConfigError(what + " must be an array of strings");
    v.push_back(e.get<std::string>());
  }
  return v;
}

clustering::DtwOptions parse_dtw(const json& t) {
  clustering::DtwOptions o;
  if (t.contains("weights")) {
    const auto& w = t["weights"];
    if (!w.is_array() || w.size() != 3) throw ConfigError("temporal.weights must be [h, v, d]");
    o.weights = {w[0].get<double>(), w[1].get<double>(), w[2].get<double>()};
  }
  const std::string metric = t.value("metric", std::string("squared_euclidean"));
  if (metric == "squared_euclidean") o.metric = clustering::LocalMetric::SquaredEuclidean;
  else if (metric == "manhattan") o.metric = clustering::LocalMetric::Manhattan;
  else throw ConfigError("temporal.metric must be 'squared_euclidean' or 'manhattan'");
  return o;
}

clustering::ZoneOptions parse_zone(const json& z) {
  clustering::ZoneOptions o;
  if (z.is_null()) return o;
  io::check_keys(z, {"kernel", "c", "gamma", "degree", "coef0", "resolution", "margin", "buffer_cells"}, "zone");
  const std::string k = z.value("kernel", std::string("rbf"));
  if (k == "rbf") o.kernel.type = clustering::KernelType::Rbf;
  else if (k == "linear") o.kernel.type = clustering::KernelType::Linear;
  else if (k == "polynomial") o.kernel.type = clustering::KernelType::Polynomial;
  else throw ConfigError("zone.kernel must be 'linear', 'polynomial' or 'rbf'");
  o.c = z.value("c", o.c);
  o.kernel.gamma = z.value("gamma", o.kernel.gamma);
  o.kernel.degree = z.value("degree", o.kernel.degree);
  o.kernel.coef0 = z.value("coef0", o.kernel.coef0);
  o.resolution = z.value("resolution", o.resolution);
  o.margin = z.value("margin", o.margin);
  o.buffer_cells = z.value("buffer_cells", o.buffer_cells);
  return o;
}

void write_assignments(const fs::path& p, const std::vector<std::string>& wells, const std::vector<int>& labels) {
  csv::Writer w(p, {"well", "cluster"});
  for (std::size_t i = 0; i < wells.size(); ++i) w.row({wells[i], std::to_string(labels[i])});
}

int cmd_cluster(const Common& common) {
  Context ctx("cluster", common,
              {"wells", "numeric", "categorical", "channels", "k", "k_range", "gamma", "n_init", "max_sweeps",
               "temporal", "fusion", "zone", "seed"});
  const auto& cfg = ctx.cfg;
  const auto wells = io::load_wells(ctx.input("wells"), string_list(ctx.section("numeric"), "numeric"),
                                    string_list(ctx.section("categorical"), "categorical"));
  const auto& f = wells.features;
  const int n = static_cast<int>(f.size());
  for (const auto& d : f.dropped) info("dropped constant or empty column '" + d + "'");

  clustering::KPrototypesOptions kopt;
  kopt.seed = ctx.seed;
  kopt.gamma = cfg.value("gamma", std::nan(""));
  kopt.n_init = cfg.value("n_init", 5);
  kopt.max_sweeps = cfg.value("max_sweeps", 100);

  int k_min = 1, k_max = std::min(8, n);
  if (cfg.contains("k_range")) {
    const auto& r = cfg["k_range"];
    if (!r.is_array() || r.size() != 2) throw ConfigError("k_range must be [k_min, k_max]");
    k_min = r[0].get<int>();
    k_max = r[1].get<int>();
    if (k_min < 1 || k_max < k_min || k_max > n) throw ConfigError("k_range must satisfy 1 <= k_min <= k_max <= wells");
  }
  std::vector<clustering::KPrototypesModel> fits(static_cast<std::size_t>(k_max - k_min + 1));
  const auto elbow = clustering::elbow_select(k_min, k_max, [&](int k) {
    fits[static_cast<std::size_t>(k - k_min)] = clustering::kprototypes_fit(f, k, kopt);
    return fits[static_cast<std::size_t>(k - k_min)].cost;
  });
  int k = elbow.k;
  if (cfg.contains("k")) {
    k = cfg["k"].get<int>();
    if (k < k_min || k > k_max) throw ConfigError("k must lie inside k_range");
  }
  if (elbow.degenerate) info("elbow curve is degenerate; k = " + std::to_string(k));
  {
    csv::Writer w(ctx.out / "cost_curve.csv", {"k", "cost", "chord_distance"});
    for (std::size_t a = 0; a < elbow.ks.size(); ++a)
      w.row({std::to_string(elbow.ks[a]), csv::fmt(elbow.costs[a]), csv::fmt(elbow.distances[a])});
  }
  const auto& spatial = fits[static_cast<std::size_t>(k - k_min)];
  for (const auto& m : spatial.log) info(m);
  write_assignments(ctx.out / "spatial_assignments.csv", f.wells, spatial.labels);
  ctx.manifest.stage("spatial", "ok", "k = " + std::to_string(k));

  std::vector<int> labels = spatial.labels;
  if (cfg.contains("channels")) {
    const auto& ch = cfg["channels"];
    if (!ch.is_object() || ch.empty()) throw ConfigError("channels must map channel names to CSV paths");
    const auto& t = ctx.section("temporal");
    if (!t.is_null())
      io::check_keys(t, {"k", "split_threshold", "depth_cap", "weights", "metric", "resample", "max_iter"}, "temporal");
    std::vector<clustering::WellSeries> series(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) series[i].well = f.wells[i];
    const int resample = t.is_null() ? 0 : t.value("resample", 0);
    for (auto it = ch.begin(); it != ch.end(); ++it) {
      auto data = io::load_channel(ctx.file(it.value().get<std::string>()));
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto s = data.find(f.wells[i]);
        if (s == data.end()) throw ConfigError("channel '" + it.key() + "' has no series for well " + f.wells[i]);
        auto ts = s->second;
        if (resample > 1) {
          std::vector<double> grid;
          for (int q = 0; q < resample; ++q)
            grid.push_back(ts.times.front() + (ts.times.back() - ts.times.front()) * q / (resample - 1));
          ts = clustering::resample(ts, grid);
        }
        series[i].channels.push_back(std::move(ts));
        data.erase(s);
      }
      if (!data.empty()) throw ConfigError("channel '" + it.key() + "' names unknown well " + data.begin()->first);
    }
    clustering::normalize_channels(series);
    const auto opt = t.is_null() ? clustering::DtwOptions{} : parse_dtw(t);
    const auto dist = kernels::pairwise_distances_parallel(series, opt);
    const int tk = t.is_null() ? 2 : t.value("k", 2);
    auto tm = clustering::temporal_kmeans(dist, tk, ctx.seed, t.is_null() ? 100 : t.value("max_iter", 100));
    tm = clustering::adaptive_split(tm, dist, t.is_null() ? 0.15 : t.value("split_threshold", 0.15),
                                    t.is_null() ? 4 : t.value("depth_cap", 4));
    for (const auto& m : tm.log) info(m);
    write_assignments(ctx.out / "temporal_assignments.csv", f.wells, tm.labels);
    ctx.manifest.stage("temporal", "ok", "k = " + std::to_string(tm.k));
    const auto& fu = ctx.section("fusion");
    const std::size_t min_size = fu.is_null() ? 2 : fu.value("min_size", 2);
    labels = clustering::fuse_labels(spatial.labels, tm.labels, f, spatial.gamma, min_size);
  }
  write_assignments(ctx.out / "assignments.csv", f.wells, labels);

  const auto zm = clustering::zone_map(wells.coords, labels, parse_zone(ctx.section("zone")));
  for (const auto& m : zm.log) info(m);
  {
    csv::Writer w(ctx.out / "zones.csv", {"x", "y", "label"});
    for (int j = 0; j < zm.ny; ++j)
      for (int i = 0; i < zm.nx; ++i)
        w.row({csv::fmt(zm.center_x(i)), csv::fmt(zm.center_y(j)), std::to_string(zm.label_at(i, j))});
  }
  {
    json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
    for (const auto& z : zm.zones) {
      json rings = json::array();
      for (const auto& r : z.rings) {
        json ring = json::array();
        for (auto [x, y] : r) ring.push_back({io::round12(x), io::round12(y)});
        ring.push_back({io::round12(r.front().first), io::round12(r.front().second)});
        rings.push_back(ring);
      }
      fc["features"].push_back({{"type", "Feature"},
                                {"properties", {{"label", z.label}}},
                                {"geometry", {{"type", "MultiLineString"}, {"coordinates", rings}}}});
    }
    std::ofstream(ctx.out / "zones.geojson") << fc.dump(1) << "\n";
  }
  std::set<int> distinct(labels.begin(), labels.end());
  info("k* = " + std::to_string(elbow.k) + ", " + std::to_string(distinct.size()) + " zones, training accuracy " +
       csv::fmt(zm.training_accuracy));
  ctx.manifest.stage("zoning", "ok", "training accuracy " + csv::fmt(zm.training_accuracy));
  ctx.finish();
  return 0;
}

int cmd_simulate(const Common& common) {
  Context ctx("simulate", common, {"network", "schedule", "solver", "seed"});
  const auto net = io::load_network(ctx.input("network"));
  const auto sched = io::load_history(ctx.input("schedule"), net.size());
  const auto solver = io::parse_solver(ctx.section("solver"));
  const auto res = run_history(net, sched, solver);
  io::write_history_pressures(ctx.out / "pressures.csv", res);
  io::write_fluxes(ctx.out / "fluxes.csv", res, net);
  if (!sched.p_obs.empty()) {
    csv::Writer w(ctx.out / "mismatch.csv", {"time", "block", "pobs", "p", "error"});
    double sse = 0.0;
    int count = 0;
    std::size_t r = 0;
    for (std::size_t n = 0; n < sched.steps(); ++n) {
      while (r < res.records.size() && res.records[r].time < sched.times[n]) ++r;
      for (std::size_t b = 0; b < net.size(); ++b) {
        const double po = sched.p_obs[n][b];
        if (std::isnan(po) || r >= res.records.size()) continue;
        const double e = res.records[r].p[b] - po;
        sse += e * e;
        ++count;
        w.row({csv::fmt(sched.times[n]), std::to_string(b), csv::fmt(po), csv::fmt(res.records[r].p[b]), csv::fmt(e)});
      }
    }
    if (count > 0) info("pressure mismatch MSE " + csv::fmt(sse / count) + " over " + std::to_string(count) + " points");
  }
  ctx.manifest.stage("history", "ok", std::to_string(res.records.size() - 1) + " steps");
  ctx.finish();
  return 0;
}

HistoryMatchProblem load_problem(Context& ctx) {
  HistoryMatchProblem p;
  p.base = io::load_network(ctx.input("network"));
  p.schedule = io::load_history(ctx.input("schedule"), p.base.size());
  p.solver = io::parse_solver(ctx.section("solver"));
  p.space = io::parse_parameters(ctx.section("parameters"));
  p.observations = io::load_observations(ctx.input("observations"), ctx.cfg.value("std_floor", 0.0));
  p.validate();
  return p;
}

int cmd_history_match(const Common& common) {
  Context ctx("history-match", common,
              {"network", "schedule", "observations", "std_floor", "parameters", "solver", "es", "seed"});
  const auto problem = load_problem(ctx);
  auto es = io::parse_es(ctx.section("es"));
  es.seed = ctx.seed;
  const auto runs = run_history_match_restarts(problem, es);

  std::vector<std::string> ens_header{"restart", "iteration", "member"};
  for (const auto& s : problem.space.specs()) ens_header.push_back(s.name);
  ens_header.push_back("objective");
  csv::Writer ens(ctx.out / "ensemble.csv", ens_header);
  csv::Writer trace(ctx.out / "objective_trace.csv",
                    {"restart", "iteration", "alpha", "objective_mean", "failed", "retries"});
  csv::Writer box(ctx.out / "boxplot_stats.csv",
                  {"restart", "iteration", "parameter", "min", "q1", "median", "q3", "max"});
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    for (const auto& it : run.iterations) {
      trace.row({std::to_string(r), std::to_string(it.iteration), csv::fmt(it.alpha), csv::fmt(it.objective_mean),
                 std::to_string(it.failed), std::to_string(it.retries)});
      for (Eigen::Index j = 0; j < it.physical.cols(); ++j) {
        std::vector<std::string> row{std::to_string(r), std::to_string(it.iteration), std::to_string(j)};
        for (Eigen::Index k = 0; k < it.physical.rows(); ++k) row.push_back(csv::fmt(it.physical(k, j)));
        const double obj = it.objectives[static_cast<std::size_t>(j)];
        row.push_back(std::isnan(obj) ? "" : csv::fmt(obj));
        ens.row(row);
      }
      for (std::size_t k = 0; k < it.params.size(); ++k) {
        const auto& b = it.params[k];
        box.row({std::to_string(r), std::to_string(it.iteration), problem.space.specs()[k].name, csv::fmt(b.min),
                 csv::fmt(b.q1), csv::fmt(b.median), csv::fmt(b.q3), csv::fmt(b.max)});
      }
    }
    for (const auto& m : run.log) debug(m);
    info("restart " + std::to_string(r) + ": " + run.stop_reason + ", objective " +
         csv::fmt(run.iterations.front().objective_mean) + " -> " + csv::fmt(run.final_iteration().objective_mean));
    ctx.manifest.stage("restart " + std::to_string(r), run.converged ? "converged" : "stopped", run.stop_reason);
  }
  ctx.finish();
  return 0;
}

int cmd_forecast(const Common& common, std::optional<double> blind) {
  Context ctx("forecast", common, {"network", "history", "forecast_schedule", "solver", "forecast", "seed"});
  const auto net = io::load_network(ctx.input("network"));
  const auto hist = io::load_history(ctx.input("history"), net.size());
  const auto controls = io::load_forecast_schedule(ctx.input("forecast_schedule"), net.size());
  auto fcfg = io::parse_forecast_config(ctx.section("forecast"));
  fcfg.newton = io::parse_solver(ctx.section("solver"));
  io::write_pattern(ctx.out / "jacobian_pattern.csv", forecast_jacobian_pattern(net));

  auto tail_after = [&](double t0, double t1) {
    ForecastSchedule s;
    for (std::size_t n = 0; n < controls.steps(); ++n)
      if (controls.times[n] > t0 * (1.0 + 1e-12) && controls.times[n] <= t1 * (1.0 + 1e-12)) {
        s.times.push_back(controls.times[n]);
        s.rows.push_back(controls.rows[n]);
      }
    return s;
  };

  if (!blind) {
    const auto full = run_history(net, hist, fcfg.newton);
    const auto sched = tail_after(full.final_state.time, std::numeric_limits<double>::infinity());
    ForecastResult res;
    if (sched.steps() > 0) res = run_forecast(net, sched, full.final_state, fcfg);
    else info("forecast schedule has no rows after the end of history");
    io::write_forecast(ctx.out / "forecast.csv", res);
    ctx.manifest.stage("forecast", "ok", std::to_string(res.records.size()) + " steps");
    ctx.finish();
    return 0;
  }

  const double frac = *blind;
  if (!(frac >= 0.0 && frac < 1.0)) throw ConfigError("--blind-test FRACTION must lie in [0, 1)");
  std::vector<std::size_t> steps;  // schedule rows with t > 0
  for (std::size_t n = 0; n < hist.steps(); ++n)
    if (hist.times[n] > 0.0) steps.push_back(n);
  const auto n_mask = static_cast<std::size_t>(std::llround(frac * static_cast<double>(steps.size())));
  if (n_mask == 0) {
    io::write_forecast(ctx.out / "forecast.csv", {});
    csv::Writer(ctx.out / "blind_test.csv", {"time", "block", "p_forecast", "p_history", "abs_error"});
    info("blind-test fraction masks no history steps; nothing to forecast");
    ctx.manifest.stage("blind-test", "ok", "empty");
    ctx.finish();
    return 0;
  }
  if (n_mask >= steps.size()) throw ConfigError("blind test must keep at least one history step");
  const std::size_t keep_rows = steps[steps.size() - n_mask];  // first masked row index
  const auto full = run_history(net, hist, fcfg.newton);
  const auto trunc = run_history(net, hist.head(keep_rows), fcfg.newton);
  const auto sched = tail_after(trunc.final_state.time, hist.times.back());
  if (sched.steps() != n_mask) throw ConfigError("forecast schedule must have a row at every masked history time");
  const auto fc = run_forecast(net, sched, trunc.final_state, fcfg);
  io::write_forecast(ctx.out / "forecast.csv", fc);

  csv::Writer w(ctx.out / "blind_test.csv", {"time", "block", "p_forecast", "p_history", "abs_error"});
  std::vector<double> max_err(net.size(), 0.0);
  for (const auto& rec : fc.records) {
    const auto it = std::find_if(full.records.begin(), full.records.end(),
                                 [&](const HistoryRecord& h) { return std::abs(h.time - rec.time) <= 1e-9 * rec.time; });
    for (std::size_t b = 0; b < net.size(); ++b) {
      const double e = std::abs(rec.p[b] - it->p[b]);
      max_err[b] = std::max(max_err[b], e);
      w.row({csv::fmt(rec.time), std::to_string(b), csv::fmt(rec.p[b]), csv::fmt(it->p[b]), csv::fmt(e)});
    }
  }
  csv::Writer s(ctx.out / "blind_summary.csv", {"block", "max_abs_error", "total_decline", "relative_error"});
  for (std::size_t b = 0; b < net.size(); ++b) {
    const double decline = full.records.front().p[b] - full.records.back().p[b];
    s.row({std::to_string(b), csv::fmt(max_err[b]), csv::fmt(decline),
           csv::fmt(decline != 0.0 ? max_err[b] / std::abs(decline) : 0.0)});
  }
  ctx.manifest.stage("blind-test", "ok", std::to_string(n_mask) + " masked steps");
  ctx.finish();
  return 0;
}

int cmd_make_synthetic(const Common& common) {
  Context ctx("make-synthetic", common,
              {"n_blocks", "n_steps", "dt", "noise_std", "prior_spread", "connections", "seed"});
  SyntheticSpec spec;
  spec.n_blocks = ctx.cfg.value("n_blocks", spec.n_blocks);
  spec.n_steps = ctx.cfg.value("n_steps", spec.n_steps);
  spec.dt = ctx.cfg.value("dt", spec.dt);
  spec.noise_std = ctx.cfg.value("noise_std", spec.noise_std);
  spec.prior_spread = ctx.cfg.value("prior_spread", spec.prior_spread);
  spec.seed = ctx.seed;
  if (ctx.cfg.contains("connections"))
    for (const auto& c : ctx.cfg["connections"]) {
      if (!c.is_array() || c.size() != 2) throw ConfigError("connections must be [i, j] pairs");
      spec.connections.emplace_back(c[0].get<int>(), c[1].get<int>());
    }
  const auto sc = make_synthetic(spec);
  write_synthetic(sc, spec, ctx.out);
  ctx.manifest.stage("synthetic", "ok",
                     std::to_string(spec.n_blocks) + " blocks, " + std::to_string(sc.network.connections().size()) +
                         " connections");
  ctx.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matnet: compartmental material-balance modelling and well clustering"};
  app.require_subcommand(1);
  Common common;
  std::optional<double> blind;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON or TOML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seed", common.seed, "override the config seed");
  };
  auto* cluster = app.add_subcommand("cluster", "spatial/temporal clustering and zone maps");
  auto* simulate = app.add_subcommand("simulate", "history material balance");
  auto* hm = app.add_subcommand("history-match", "ensemble-smoother calibration");
  auto* forecast = app.add_subcommand("forecast", "pressure forecast from the end of history");
  auto* synth = app.add_subcommand("make-synthetic", "generate a synthetic twin case");
  for (auto* s : {cluster, simulate, hm, forecast, synth}) add_common(s);
  forecast->add_option("--blind-test", blind, "mask this trailing fraction of history and forecast it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*cluster) return cmd_cluster(common);
    if (*simulate) return cmd_simulate(common);
    if (*hm) return cmd_history_match(common);
    if (*forecast) return cmd_forecast(common, blind);
    if (*synth) return cmd_make_synthetic(common);
  } catch (const ConfigError& e) {
    std::cerr << "matnet: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NonconvergenceError& e) {
    std::cerr << "matnet: solver did not converge: " << e.what() << "\n";
    return 3;
  } catch (const LinearSolveError& e) {
    std::cerr << "matnet: solver failure: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "matnet: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "matnet: internal error: " << e.what() << "\n";
    return 4;
  }
  return 4;
}

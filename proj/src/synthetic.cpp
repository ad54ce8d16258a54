#include "matnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "matnet/error.hpp"
#include "matnet/io.hpp"
#include "matnet/rng.hpp"

namespace matnet {

namespace {

using io::round12;

std::shared_ptr<const PvtTable> synthetic_pvt() {
  constexpr double pb = 2000.0, rsb = 600.0, co = 1.5e-5;
  PvtTable::Columns c;
  for (double p = 500.0; p <= 6000.0; p += 250.0) c.p.push_back(p);
  auto col = [&](Property prop) -> std::vector<double>& { return c.values[static_cast<std::size_t>(prop)]; };
  for (double p : c.p) {
    const double rs = rsb * std::min(p, pb) / pb;
    const double bob = 1.05 + 3e-4 * rsb;
    const double bo = p <= pb ? 1.05 + 3e-4 * rs : bob * std::exp(-co * (p - pb));
    col(Property::Bo).push_back(round12(bo));
    col(Property::Bg).push_back(round12(2.9 / p));
    col(Property::Bw).push_back(round12(1.02 * std::exp(-3e-6 * (p - 14.7))));
    col(Property::Rs).push_back(round12(rs));
    col(Property::Rv).push_back(0.0);
    col(Property::MuO).push_back(round12(p <= pb ? 1.4 - 0.6 * rs / rsb : 0.8 + 5e-5 * (p - pb)));
    col(Property::MuG).push_back(round12(0.012 + 4e-6 * p));
    col(Property::MuW).push_back(0.5);
    col(Property::RhoO).push_back(round12(48.0 - 0.01 * rs));
    col(Property::RhoG).push_back(round12(2e-3 * p + 1.0));
    col(Property::RhoW).push_back(62.4);
  }
  return std::make_shared<const PvtTable>(std::move(c));
}

std::shared_ptr<const RelPermCurves> synthetic_relperm() {
  std::vector<double> s, kro, krw, krg;
  constexpr double swc = 0.2, sor = 0.2;
  for (int k = 0; k <= 20; ++k) {
    const double v = k / 20.0;
    s.push_back(v);
    const double so_n = std::clamp((v - sor) / (1.0 - swc - sor), 0.0, 1.0);
    const double sw_n = std::clamp((v - swc) / (1.0 - swc - sor), 0.0, 1.0);
    const double sg_n = std::clamp((v - 0.05) / (1.0 - swc - 0.05), 0.0, 1.0);
    kro.push_back(round12(0.9 * so_n * so_n));
    krw.push_back(round12(0.4 * sw_n * sw_n));
    krg.push_back(round12(0.8 * sg_n * sg_n));
  }
  return std::make_shared<const RelPermCurves>(s, kro, krw, krg);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_blocks < 1) throw ConfigError("synthetic: n_blocks must be positive");
  if (n_steps < 2) throw ConfigError("synthetic: n_steps must be at least 2");
  if (!(dt > 0.0)) throw ConfigError("synthetic: dt must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("synthetic: noise_std must be non-negative");
  if (!(prior_spread > 0.0 && prior_spread < 1.0)) throw ConfigError("synthetic: prior_spread must lie in (0, 1)");
  for (auto [i, j] : connections)
    if (i < 0 || j < 0 || i >= n_blocks || j >= n_blocks || i == j)
      throw ConfigError("synthetic: invalid connection");
}

std::vector<std::pair<int, int>> default_connections(int n_blocks) {
  if (n_blocks == 5) return {{0, 1}, {1, 2}, {1, 4}, {2, 4}, {2, 3}, {3, 4}};
  std::vector<std::pair<int, int>> c;
  for (int b = 0; b + 1 < n_blocks; ++b) c.emplace_back(b, b + 1);
  if (n_blocks >= 3) c.emplace_back(0, 2);
  return c;
}

HistoryMatchProblem SyntheticCase::problem(const SolverConfig& solver) const {
  return {network, history, solver, space, observations};
}

SyntheticCase make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int nb = spec.n_blocks;
  const auto conns = spec.connections.empty() ? default_connections(nb) : spec.connections;
  const auto pvt = synthetic_pvt();
  const auto kr = synthetic_relperm();

  static const double kOoip[] = {20e6, 15e6, 25e6, 10e6, 18e6};
  static const double kT[] = {40.0, 25.0, 60.0, 30.0, 50.0, 20.0};
  std::vector<Block> blocks;
  for (int b = 0; b < nb; ++b) {
    Block blk;
    blk.id = b;
    blk.n_foi = kOoip[b % 5] * (1.0 + 0.1 * (b / 5));
    blk.s_wi = 0.2;
    blk.c_f = 4e-6;
    blk.c_w = 3e-6;
    blk.p_init = 4000.0;
    blk.z = 8000.0;
    blk.pvt = pvt;
    blk.relperm = kr;
    if (b == nb - 1) blk.aquifer = AquiferParams{2e6, 1.0, blk.p_init};
    blocks.push_back(blk);
  }
  std::vector<Connection> cs;
  for (std::size_t k = 0; k < conns.size(); ++k) cs.push_back({conns[k].first, conns[k].second, kT[k % 6]});
  const double t_max = 200.0;

  SyntheticCase c;
  c.network = ReservoirNetwork(blocks, cs, t_max);
  c.network.validate();

  // Controls: block 2 (mod 5) injects water, the others produce. They run a
  // fifth past the history so a plain forecast has somewhere to go.
  const int horizon = spec.n_steps + std::max(1, spec.n_steps / 5);
  for (int n = 1; n <= horizon; ++n) {
    const double t = n * spec.dt;
    c.controls.times.push_back(t);
    std::vector<ForecastControl> row;
    for (int b = 0; b < nb; ++b) {
      ForecastControl fc;
      fc.pwf = 1000.0 + 100.0 * (b % 3);
      if (b % 5 == 2) {
        fc.winj = round12(100.0 * t);
      } else {
        fc.n_producers = 1 + (b % 2);
        fc.qlmax = 120.0 + 20.0 * (b % 4);
      }
      row.push_back(fc);
    }
    c.controls.rows.push_back(row);
  }

  const auto gen = run_forecast(c.network, c.controls, HistoryState::initial(c.network), ForecastConfig{});
  c.history.times.push_back(0.0);
  c.history.cum.emplace_back(static_cast<std::size_t>(nb));
  for (std::size_t n = 0; n < static_cast<std::size_t>(spec.n_steps); ++n) {
    const auto& r = gen.records[n];
    c.history.times.push_back(r.time);
    std::vector<Cumulatives> row;
    for (int b = 0; b < nb; ++b) {
      const auto q = static_cast<std::size_t>(b);
      row.push_back({round12(r.np[q]), round12(r.gp[q]), round12(r.wp[q]), round12(c.controls.rows[n][q].ginj),
                     round12(c.controls.rows[n][q].winj)});
    }
    c.history.cum.push_back(row);
  }
  c.history.validate(static_cast<std::size_t>(nb));
  c.truth_run = run_history(c.network, c.history, SolverConfig{});

  Rng rng(spec.seed);
  const auto nobs = static_cast<Eigen::Index>(spec.n_steps * nb);
  c.observations.values.resize(nobs);
  c.observations.sigma.resize(nobs);
  c.history.p_obs.assign(c.history.times.size(), std::vector<double>(static_cast<std::size_t>(nb), NAN));
  Eigen::Index k = 0;
  for (std::size_t n = 1; n < c.truth_run.records.size(); ++n)
    for (int b = 0; b < nb; ++b, ++k) {
      const double p = round12(c.truth_run.records[n].p[static_cast<std::size_t>(b)] + spec.noise_std * rng.normal());
      c.observations.times.push_back(c.truth_run.records[n].time);
      c.observations.blocks.push_back(b);
      c.observations.values(k) = p;
      c.history.p_obs[n][static_cast<std::size_t>(b)] = p;
    }
  c.observations.sigma =
      ObservationSet::base_std(c.observations.values, Eigen::VectorXd::Constant(nobs, spec.noise_std), 0.0);

  std::vector<ParameterSpec> specs;
  std::vector<double> truth;
  auto add = [&](std::string name, double v) {
    specs.push_back({std::move(name), round12(v * (1.0 - spec.prior_spread)), round12(v * (1.0 + spec.prior_spread)),
                     Transform::Log, PriorKind::Uniform, 0.0, 0.0});
    truth.push_back(v);
  };
  for (int b = 0; b < nb; ++b) add("ooip:" + std::to_string(b), c.network.block(static_cast<std::size_t>(b)).n_foi);
  for (const auto& cn : c.network.connections())
    add("tij:" + std::to_string(cn.i) + ":" + std::to_string(cn.j), cn.t);
  const auto& aq = *c.network.block(static_cast<std::size_t>(nb - 1)).aquifer;
  add("wei:" + std::to_string(nb - 1), aq.wei);
  add("j:" + std::to_string(nb - 1), aq.j);
  c.space = ParameterSpace(specs);
  c.truth = Eigen::Map<const Eigen::VectorXd>(truth.data(), static_cast<Eigen::Index>(truth.size()));
  return c;
}

void write_synthetic(const SyntheticCase& c, const SyntheticSpec& spec, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  io::save_network(dir / "network.json", c.network);
  io::save_history(dir / "history.csv", c.history);
  io::save_forecast_schedule(dir / "controls.csv", c.controls);
  io::save_observations(dir / "observations.csv", c.observations);

  auto write_json = [&](const fs::path& p, const io::json& j) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << j.dump(2) << "\n";
  };
  io::json truth = io::json::object();
  for (std::size_t k = 0; k < c.space.size(); ++k)
    truth[c.space.specs()[k].name] = round12(c.truth(static_cast<Eigen::Index>(k)));
  write_json(dir / "truth.json", {{"parameters", truth},
                                  {"n_blocks", spec.n_blocks},
                                  {"n_steps", spec.n_steps},
                                  {"dt", round12(spec.dt)},
                                  {"noise_std", round12(spec.noise_std)},
                                  {"seed", spec.seed}});
  write_json(dir / "simulate.json", {{"network", "network.json"}, {"schedule", "history.csv"}, {"seed", spec.seed}});
  write_json(dir / "history_match.json", {{"network", "network.json"},
                                          {"schedule", "history.csv"},
                                          {"observations", "observations.csv"},
                                          {"parameters", io::parameters_to_json(c.space)},
                                          {"es", {{"n_e", 50}, {"max_iters", 20}}},
                                          {"seed", spec.seed}});
  write_json(dir / "forecast.json", {{"network", "network.json"},
                                     {"history", "history.csv"},
                                     {"forecast_schedule", "controls.csv"},
                                     {"seed", spec.seed}});
}

}  // namespace matnet

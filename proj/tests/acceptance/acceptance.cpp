// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Usage:
//   matnet_acceptance --cli <matnet binary> --data <data dir> --work <scratch dir>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "matnet/aquifer.hpp"
#include "matnet/clustering/dtw.hpp"
#include "matnet/clustering/elbow.hpp"
#include "matnet/clustering/features.hpp"
#include "matnet/clustering/kprototypes.hpp"
#include "matnet/clustering/zone_map.hpp"
#include "matnet/csv.hpp"
#include "matnet/history_match.hpp"
#include "matnet/io.hpp"
#include "matnet/synthetic.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace matnet;
using testsupport::JacobianCheck;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Args {
  std::string cli, data, work;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const SyntheticCase& twin() {
  static const SyntheticCase c = make_synthetic(SyntheticSpec{});
  return c;
}

// 1. History Jacobian against central differences on random 3-block networks.
Outcome history_jacobian() {
  JacobianCheck all;
  for (std::uint64_t s = 0; s < 100; ++s) all.merge(testsupport::history_jacobian_trial(1000 + s));
  return {all.ok(), std::to_string(all.entries) + " entries, worst rel " + fmt(all.worst_rel) +
                        (all.ok() ? "" : ", first failure " + all.first_failure)};
}

// 2. Forecast Jacobian against central differences on the five-block twin.
Outcome forecast_jacobian() {
  JacobianCheck all;
  for (std::uint64_t s = 0; s < 100; ++s) all.merge(testsupport::forecast_jacobian_trial(twin(), 2000 + s));
  return {all.ok(), std::to_string(all.entries) + " entries, worst rel " + fmt(all.worst_rel) +
                        (all.ok() ? "" : ", first failure " + all.first_failure)};
}

// 3. Forecast Jacobian sparsity on the five-block topology.
Outcome jacobian_structure() {
  const auto& net = twin().network;
  std::set<std::pair<int, int>> expected;
  const int n = static_cast<int>(net.size());
  for (int b = 0; b < n; ++b)
    for (int r = 0; r < kUnknownsPerBlock; ++r)
      for (int c = 0; c < kUnknownsPerBlock; ++c)
        expected.insert({kUnknownsPerBlock * b + r, kUnknownsPerBlock * b + c});
  for (const auto& c : net.connections()) {
    expected.insert({kUnknownsPerBlock * c.i, kUnknownsPerBlock * c.j});
    expected.insert({kUnknownsPerBlock * c.j, kUnknownsPerBlock * c.i});
  }
  const auto pat = forecast_jacobian_pattern(net);
  const std::set<std::pair<int, int>> got(pat.begin(), pat.end());
  std::set<int> fifth;
  for (const auto& [r, c] : got)
    if (r / kUnknownsPerBlock == 4 && c / kUnknownsPerBlock != 4) fifth.insert(c / kUnknownsPerBlock);
  const bool fifth_ok = fifth == std::set<int>{1, 2, 3};

  // Evaluated nonzeros must lie inside the structural pattern.
  int outside = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(3000 + s);
    const std::size_t k = 2 + rng.index(twin().history.steps() - 3);
    const auto state = run_history(net, twin().history.head(k), SolverConfig{}).final_state;
    const ForecastConfig cfg;
    ForecastStepSystem sys(net, state, twin().controls.rows[k], twin().controls.times[k] - twin().controls.times[k - 1],
                           cfg);
    const Eigen::MatrixXd jac = sys.jacobian(sys.initial_guess());
    for (int r = 0; r < jac.rows(); ++r)
      for (int c = 0; c < jac.cols(); ++c)
        if (jac(r, c) != 0.0 && !got.count({r, c})) ++outside;
  }
  const bool ok = got == expected && got.size() == pat.size() && fifth_ok && outside == 0;
  return {ok, std::to_string(got.size()) + " structural nonzeros, fifth block couples to " +
                  std::to_string(fifth.size()) + " neighbours, " + std::to_string(outside) +
                  " evaluated entries outside"};
}

// 4. Undersaturated single tank against the effective-compressibility solution.
Outcome single_tank() {
  const testsupport::SingleTank tank;
  const auto net = tank.network();
  HistorySchedule sched;
  for (int n = 0; n <= 100; ++n) {
    sched.times.push_back(30.0 * n);
    Cumulatives c;
    c.np = 2000.0 * n;
    c.gp = tank.rs * c.np;
    sched.cum.push_back({c});
  }
  const auto res = run_history(net, sched, SolverConfig{});
  double worst = 0.0;
  for (int n = 0; n <= 100; ++n)
    worst = std::max(worst, std::abs(res.records[static_cast<std::size_t>(n)].p[0] - tank.pressure(2000.0 * n)));
  return {worst <= 0.1, "max |p - p_exact| = " + fmt(worst) + " psi over 100 steps"};
}

// 5. Aquifer closed form against the step recursion, and dwe_dp against FD.
Outcome aquifer_equivalence() {
  double worst = 0.0, worst_d = 0.0;
  int d_checked = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(5000 + s);
    const double p0 = rng.uniform(3000.0, 5000.0);
    const AquiferParams a{rng.uniform(1e6, 1e8), rng.uniform(0.5, 50.0), p0};
    const std::size_t n = 1000;
    // p[k-1] and dts[k-1] belong to step k.
    std::vector<double> p(n), dts(n);
    double prev = p0;
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = prev = std::max(500.0, prev - rng.uniform(-5.0, 10.0));
      dts[k] = rng.uniform(1.0, 60.0);
    }
    // Recursion with the step-average pressure replaced by the step-end pressure.
    double we = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      we = aquifer::step_recursive(a, we, p[k - 1], p[k - 1], dts[k - 1]);
      const double cf = aquifer::closed_form(a, p, dts, k);
      worst = std::max(worst, std::abs(cf - we) / std::max(std::abs(we), 1e-300));
    }
    // Derivative against central differences on a few (k, j) pairs, 1-based.
    // W_e is linear in the pressures, so a wide step costs no truncation
    // error and keeps roundoff in W_e (order 1e-13 relative) below 1e-8.
    for (int t = 0; t < 5; ++t) {
      const std::size_t k = 1 + rng.index(n);
      const std::size_t j = k > 30 ? k - rng.index(30) : 1 + rng.index(k);
      const double h = 1000.0;
      auto pp = p, pm = p;
      pp[j - 1] += h;
      pm[j - 1] -= h;
      const double fd =
          (aquifer::closed_form(a, pp, dts, k) - aquifer::closed_form(a, pm, dts, k)) / (pp[j - 1] - pm[j - 1]);
      const double an = aquifer::dwe_dp(a, dts, k, j);
      worst_d = std::max(worst_d, std::abs(an - fd) / std::abs(an));
      ++d_checked;
    }
  }
  return {worst <= 1e-10 && worst_d <= 1e-8,
          "closed form vs recursion " + fmt(worst) + " rel, dwe_dp vs FD " + fmt(worst_d) + " rel over " +
              std::to_string(d_checked) + " entries"};
}

// 6. Residual and flux bookkeeping on the synthetic five-block history run.
Outcome bookkeeping() {
  const auto& c = twin();
  const SolverConfig cfg;
  const auto res = run_history(c.network, c.history, cfg);
  double worst_res = 0.0;
  long asym = 0, recorded_mismatch = 0, fluxes = 0;
  for (std::size_t n = 1; n < res.records.size(); ++n) {
    const auto& rec = res.records[n];
    for (double r : rec.residual) worst_res = std::max(worst_res, std::abs(r));
    const double dt = rec.time - res.records[n - 1].time;
    const auto& sat = res.records[n - 1].sat;
    const auto& conns = c.network.connections();
    for (std::size_t k = 0; k < conns.size(); ++k) {
      const auto& cn = conns[k];
      const auto& bi = c.network.block(static_cast<std::size_t>(cn.i));
      const auto& bj = c.network.block(static_cast<std::size_t>(cn.j));
      const double pi = rec.p[static_cast<std::size_t>(cn.i)], pj = rec.p[static_cast<std::size_t>(cn.j)];
      const auto fij = connection_flux(bi, bj, cn.t, pi, pj, sat[static_cast<std::size_t>(cn.i)],
                                       sat[static_cast<std::size_t>(cn.j)], dt, cfg);
      const auto fji = connection_flux(bj, bi, cn.t, pj, pi, sat[static_cast<std::size_t>(cn.j)],
                                       sat[static_cast<std::size_t>(cn.i)], dt, cfg);
      for (int a = 0; a < kPhaseCount; ++a) {
        ++fluxes;
        if (fij.flux[a] != -fji.flux[a]) ++asym;
        if (rec.step_flux[k][a] != fij.flux[a]) ++recorded_mismatch;
      }
    }
  }
  const bool ok = worst_res < cfg.newton_tol_residual && asym == 0 && recorded_mismatch == 0;
  return {ok, "max |R| = " + fmt(worst_res) + " RB over " + std::to_string(res.records.size() - 1) + " steps, " +
                  std::to_string(asym) + " antisymmetry violations and " + std::to_string(recorded_mismatch) +
                  " recorded-flux mismatches in " + std::to_string(fluxes) + " phase fluxes"};
}

// 7. DTW against exhaustive path enumeration.
Outcome dtw_oracle() {
  using namespace clustering;
  long mismatches = 0, cases = 0;
  Rng rng(7000);
  for (int pair = 0; pair < 1000; ++pair) {
    std::vector<double> x(1 + rng.index(8)), y(1 + rng.index(8));
    for (auto& v : x) v = rng.uniform(-3.0, 3.0);
    for (auto& v : y) v = rng.uniform(-3.0, 3.0);
    for (const DtwWeights w : {DtwWeights{1.0, 1.0, 1.0}, DtwWeights{1.0, 1.0, 2.0}})
      for (const LocalMetric m : {LocalMetric::SquaredEuclidean, LocalMetric::Manhattan}) {
        const DtwOptions opt{w, m};
        ++cases;
        if (dtw_cost(x, y, opt) != testsupport::dtw_bruteforce(x, y, opt)) ++mismatches;
      }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(cases) + " cases"};
}

clustering::WellFeatureMatrix random_mixed(Rng& rng, std::size_t n, std::size_t dn, std::size_t dc) {
  std::vector<std::string> wells, nn, cn;
  for (std::size_t i = 0; i < n; ++i) wells.push_back("w" + std::to_string(i));
  for (std::size_t d = 0; d < dn; ++d) nn.push_back("x" + std::to_string(d));
  for (std::size_t d = 0; d < dc; ++d) cn.push_back("c" + std::to_string(d));
  std::vector<std::vector<double>> num(n, std::vector<double>(dn));
  std::vector<std::vector<std::string>> cat(n, std::vector<std::string>(dc));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : num[i]) v = rng.normal() + (rng.uniform() < 0.5 ? 3.0 : 0.0);
    for (auto& v : cat[i]) v = "v" + std::to_string(rng.index(3));
  }
  // Numeric columns need two distinct values to survive the constant-column drop.
  for (std::size_t d = 0; d < dn; ++d) num[1][d] = num[0][d] + 1.0;
  return clustering::WellFeatureMatrix::build(wells, nn, num, cn, cat);
}

// 8. k-prototypes: monotone cost per sweep and the exhaustive optimum.
Outcome kprototypes_properties() {
  using namespace clustering;
  Rng rng(8000);
  int increases = 0, sweeps = 0;
  for (int t = 0; t < 50; ++t) {
    const auto f = random_mixed(rng, 20 + rng.index(60), 1 + rng.index(4), rng.index(4));
    KPrototypesOptions opt;
    opt.seed = static_cast<std::uint64_t>(t);
    const auto m = kprototypes_fit(f, 2 + static_cast<int>(rng.index(5)), opt);
    for (std::size_t s = 1; s < m.cost_trace.size(); ++s, ++sweeps)
      if (m.cost_trace[s] > m.cost_trace[s - 1] * (1.0 + 1e-12)) ++increases;
  }
  int missed = 0;
  for (int t = 0; t < 20; ++t) {
    const auto f = random_mixed(rng, 4 + rng.index(7), 1 + rng.index(3), rng.index(3));
    KPrototypesOptions opt;
    opt.seed = static_cast<std::uint64_t>(100 + t);
    opt.n_init = 20;
    const auto m = kprototypes_fit(f, 2, opt);
    const double best = testsupport::best_two_partition_cost(f.numeric, f.categorical, m.gamma);
    if (m.cost > best * (1.0 + 1e-12) + 1e-12) ++missed;
  }
  return {increases == 0 && missed == 0, std::to_string(increases) + " cost increases in " + std::to_string(sweeps) +
                                             " sweeps, " + std::to_string(missed) + "/20 optima missed"};
}

// 9. Elbow and zoning on the bundled fixtures.
Outcome elbow_zoning(const Args& args) {
  using namespace clustering;
  const fs::path blob = fs::path(args.data) / "three_blob";
  const auto cfg = io::load_config(blob / "cluster.json");
  std::vector<std::string> numeric = cfg["numeric"], categorical = cfg["categorical"];
  const auto wells = io::load_wells(blob / cfg["wells"].get<std::string>(), numeric, categorical);
  KPrototypesOptions kopt;
  kopt.seed = cfg["seed"].get<std::uint64_t>();
  kopt.n_init = cfg["n_init"].get<int>();
  const int k_min = cfg["k_range"][0], k_max = cfg["k_range"][1];
  std::vector<KPrototypesModel> fits(static_cast<std::size_t>(k_max - k_min + 1));
  const auto elbow = elbow_select(k_min, k_max, [&](int k) {
    fits[static_cast<std::size_t>(k - k_min)] = kprototypes_fit(wells.features, k, kopt);
    return fits[static_cast<std::size_t>(k - k_min)].cost;
  });
  const auto& labels = fits[static_cast<std::size_t>(elbow.k - k_min)].labels;
  const auto zm = zone_map(wells.coords, labels, {});
  int inconsistent = 0;
  for (Eigen::Index i = 0; i < wells.coords.rows(); ++i) {
    const auto [cx, cy] = zm.cell_of(wells.coords(i, 0), wells.coords(i, 1));
    if (zm.label_at(cx, cy) != labels[static_cast<std::size_t>(i)]) ++inconsistent;
    if (zm.predicted[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(i)]) ++inconsistent;
  }

  const auto xt = csv::read(fs::path(args.data) / "xor" / "wells.csv");
  Eigen::MatrixXd xy(static_cast<Eigen::Index>(xt.rows.size()), 2);
  std::vector<int> xl;
  for (std::size_t r = 0; r < xt.rows.size(); ++r) {
    xy(static_cast<Eigen::Index>(r), 0) = xt.number(r, xt.column("x"));
    xy(static_cast<Eigen::Index>(r), 1) = xt.number(r, xt.column("y"));
    xl.push_back(static_cast<int>(xt.number(r, xt.column("label"))));
  }
  ZoneOptions lin;
  lin.kernel.type = KernelType::Linear;
  ZoneOptions rbf;
  rbf.kernel.type = KernelType::Rbf;
  const double acc_lin = zone_map(xy, xl, lin).training_accuracy;
  const double acc_rbf = zone_map(xy, xl, rbf).training_accuracy;

  const bool ok = elbow.k == 3 && !elbow.degenerate && inconsistent == 0 && zm.training_accuracy == 1.0 &&
                  acc_lin < 1.0 && acc_rbf == 1.0;
  return {ok, "k* = " + std::to_string(elbow.k) + ", " + std::to_string(inconsistent) +
                  " inconsistent wells, XOR accuracy linear " + fmt(acc_lin) + " rbf " + fmt(acc_rbf)};
}

// 10. ES-rLM update on a linear forward model against the direct solve.
Outcome linear_gaussian() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) worst = std::max(worst, testsupport::linear_gaussian_trial(10000 + s));
  return {worst < 3.0, "worst |mean - direct| = " + fmt(worst) + " standard errors over 20 seeds"};
}

// 11. History match of the synthetic twin.
Outcome twin_history_match() {
  const auto& c = twin();
  const auto problem = c.problem();
  EsConfig es;
  es.n_e = 50;
  es.seed = 11;
  const auto run = run_history_match(problem, es);
  const double j0 = run.iterations.front().objective_mean;
  const double j1 = run.final_iteration().objective_mean;
  double worst_ooip = 0.0;
  for (std::size_t b = 0; b < c.network.size(); ++b) {
    const std::size_t k = c.space.index_of("ooip:" + std::to_string(b));
    const double truth = c.truth[static_cast<Eigen::Index>(k)];
    worst_ooip = std::max(worst_ooip, std::abs(run.final_iteration().params[k].median - truth) / truth);
  }
  return {j1 <= 0.1 * j0 && worst_ooip <= 0.1,
          "objective " + fmt(j0) + " -> " + fmt(j1) + " (ratio " + fmt(j1 / j0) + ") in " +
              std::to_string(run.iterations.size() - 1) + " iterations, worst OOIP median error " +
              fmt(100.0 * worst_ooip) + "%"};
}

int run_cli(const Args& args, const std::string& cmdline) {
  const std::string full = "MATNET_LOG=quiet \"" + args.cli + "\" " + cmdline + " > /dev/null 2>&1";
  const int status = std::system(full.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const io::json& j) { std::ofstream(p) << j.dump(2) << "\n"; }

// 12. Blind-test forecast of the final 10% of the twin history via the CLI.
Outcome blind_test(const Args& args) {
  const fs::path dir = fs::path(args.work) / "blind";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_json(dir / "synthetic.json", {{"seed", 12}});
  if (run_cli(args, "make-synthetic --config " + (dir / "synthetic.json").string() + " --out " +
                        (dir / "case").string()) != 0)
    return {false, "make-synthetic failed"};
  if (run_cli(args, "forecast --config " + (dir / "case" / "forecast.json").string() + " --blind-test 0.1 --out " +
                        (dir / "out").string()) != 0)
    return {false, "forecast --blind-test failed"};
  const auto t = csv::read(dir / "out" / "blind_summary.csv");
  double worst = 0.0;
  bool declines = true;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    worst = std::max(worst, t.number(r, t.column("relative_error")));
    declines = declines && t.number(r, t.column("total_decline")) > 0.0;
  }
  return {!t.rows.empty() && declines && worst <= 0.01,
          "worst block error " + fmt(100.0 * worst) + "% of total decline over " + std::to_string(t.rows.size()) +
              " blocks"};
}

std::map<std::string, std::string> csv_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      out[fs::relative(e.path(), dir).string()] = ss.str();
    }
  return out;
}

// 13. Every command rerun with the same config and seed gives identical CSVs.
Outcome determinism(const Args& args) {
  const fs::path dir = fs::path(args.work) / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_json(dir / "synthetic.json", {{"seed", 13}, {"n_steps", 30}});
  const fs::path c = dir / "case";
  if (run_cli(args, "make-synthetic --config " + (dir / "synthetic.json").string() + " --out " + c.string()) != 0)
    return {false, "make-synthetic failed"};
  auto hm = io::load_config(c / "history_match.json");
  hm["es"] = {{"n_e", 12}, {"max_iters", 3}, {"restarts", 2}};
  write_json(c / "history_match_small.json", hm);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"make-synthetic", "make-synthetic --config " + (dir / "synthetic.json").string()},
      {"simulate", "simulate --config " + (c / "simulate.json").string()},
      {"history-match", "history-match --config " + (c / "history_match_small.json").string()},
      {"forecast", "forecast --config " + (c / "forecast.json").string()},
      {"blind-test", "forecast --blind-test 0.1 --config " + (c / "forecast.json").string()},
      {"cluster", "cluster --config " + (fs::path(args.data) / "three_blob" / "cluster_temporal.json").string()},
  };
  int differing = 0, files = 0;
  std::string bad;
  for (const auto& [name, cmd] : commands) {
    const fs::path a = dir / (name + "_a"), b = dir / (name + "_b");
    if (run_cli(args, cmd + " --out " + a.string()) != 0 || run_cli(args, cmd + " --out " + b.string()) != 0)
      return {false, name + " failed to run"};
    const auto ca = csv_contents(a), cb = csv_contents(b);
    files += static_cast<int>(ca.size());
    if (ca.empty() || ca != cb) {
      ++differing;
      bad += " " + name;
    }
  }
  return {differing == 0, std::to_string(files) + " CSVs compared across " + std::to_string(commands.size()) +
                              " commands" + (bad.empty() ? "" : ", differing:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matnet acceptance criteria"};
  Args args;
  app.add_option("--cli", args.cli, "matnet binary")->required();
  app.add_option("--data", args.data, "bundled fixture directory")->required();
  app.add_option("--work", args.work, "scratch directory")->required();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(args.work);

  struct Criterion {
    std::string name;
    double limit_s;  ///< runtime budget, infinity when unbounded
    std::function<Outcome()> run;
  };
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria = {
      {"history Jacobian vs finite differences", 60.0, history_jacobian},
      {"forecast Jacobian vs finite differences", 60.0, forecast_jacobian},
      {"forecast Jacobian structure", inf, jacobian_structure},
      {"single-tank closed form", 1.0, single_tank},
      {"aquifer closed form vs recursion", 10.0, aquifer_equivalence},
      {"residual and flux bookkeeping", 10.0, bookkeeping},
      {"DTW vs exhaustive enumeration", 60.0, dtw_oracle},
      {"k-prototypes cost and optimum", 60.0, kprototypes_properties},
      {"elbow and zoning fixtures", inf, [&] { return elbow_zoning(args); }},
      {"ES-rLM linear-Gaussian update", 10.0, linear_gaussian},
      {"synthetic twin history match", 300.0, twin_history_match},
      {"blind-test forecast", 60.0, [&] { return blind_test(args); }},
      {"rerun determinism", inf, [&] { return determinism(args); }},
  };
  // Build the shared twin outside any timed criterion.
  (void)twin();

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs) << " s" << (in_time ? "" : ", over the " + fmt(c.limit_s) + " s budget") << ")"
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "matnet/clustering/dtw.hpp"
#include "matnet/history_match.hpp"
#include "matnet/matbal_forecast.hpp"
#include "matnet/matbal_history.hpp"
#include "matnet/pvt.hpp"
#include "matnet/relperm.hpp"
#include "matnet/reservoir_model.hpp"
#include "matnet/rng.hpp"
#include "matnet/synthetic.hpp"

namespace testsupport {

using matnet::Property;

/// Smooth, strictly positive PVT table with randomized node spacing.
/// Rs <= 1000 and Rv <= 1.2e-4 keep 1 - Rs Rv >= 0.88.
inline std::shared_ptr<const matnet::PvtTable> random_pvt(matnet::Rng& rng) {
  matnet::PvtTable::Columns c;
  double p = 200.0;
  while (p < 7000.0) {
    c.p.push_back(p);
    p += rng.uniform(250.0, 600.0);
  }
  const double bo0 = rng.uniform(1.05, 1.25), bo1 = rng.uniform(0.1, 0.4);
  const double rs0 = rng.uniform(50.0, 200.0), rs1 = rng.uniform(300.0, 800.0);
  const double rv0 = rng.uniform(1e-6, 2e-5), rv1 = rng.uniform(2e-5, 1e-4);
  const double muo0 = rng.uniform(0.4, 2.0), mug0 = rng.uniform(0.01, 0.03), muw0 = rng.uniform(0.3, 0.8);
  for (double x : c.p) {
    const double u = x / 7000.0;
    auto set = [&](Property prop, double v) { c.values[static_cast<std::size_t>(prop)].push_back(v); };
    set(Property::Bo, bo0 + bo1 * u + 0.01 * rng.uniform());
    set(Property::Bg, rng.uniform(0.9, 1.1) * 5.0 / x);
    set(Property::Bw, 1.03 - 3e-6 * x);
    set(Property::Rs, rs0 + rs1 * u + 5.0 * rng.uniform());
    set(Property::Rv, rv0 + rv1 * u);
    set(Property::MuO, muo0 * (1.2 - 0.4 * u) + 0.02 * rng.uniform());
    set(Property::MuG, mug0 * (0.8 + 0.6 * u));
    set(Property::MuW, muw0 + 0.01 * rng.uniform());
    set(Property::RhoO, 48.0 - 4.0 * u + rng.uniform());
    set(Property::RhoG, 2.0 + 14.0 * u);
    set(Property::RhoW, 62.4 + 0.5 * u);
  }
  return std::make_shared<const matnet::PvtTable>(std::move(c));
}

inline std::shared_ptr<const matnet::RelPermCurves> random_relperm(matnet::Rng& rng) {
  std::vector<double> s, kro, krw, krg;
  const double eo = rng.uniform(1.5, 3.0), ew = rng.uniform(1.5, 4.0), eg = rng.uniform(1.5, 3.0);
  for (int k = 0; k <= 10; ++k) {
    const double x = 0.1 * k;
    s.push_back(x);
    kro.push_back(std::pow(x, eo));
    krw.push_back(0.4 * std::pow(x, ew));
    krg.push_back(0.8 * std::pow(x, eg));
  }
  return std::make_shared<const matnet::RelPermCurves>(s, kro, krw, krg);
}

/// Randomized network with every block pair connected, distinct depths and
/// an aquifer on roughly half the blocks.
inline matnet::ReservoirNetwork random_network(matnet::Rng& rng, int n_blocks) {
  std::vector<matnet::Block> blocks;
  for (int b = 0; b < n_blocks; ++b) {
    matnet::Block blk;
    blk.id = b;
    blk.n_foi = rng.uniform(5e5, 3e6);
    blk.g_fgi = rng.uniform() < 0.5 ? 0.0 : rng.uniform(1e7, 2e8);
    blk.s_wi = rng.uniform(0.1, 0.35);
    blk.c_f = rng.uniform(1e-6, 1e-5);
    blk.c_w = rng.uniform(2e-6, 4e-6);
    blk.p_init = rng.uniform(3000.0, 5000.0);
    blk.z = rng.uniform(6000.0, 9000.0);
    blk.pvt = random_pvt(rng);
    blk.relperm = random_relperm(rng);
    if (rng.uniform() < 0.5)
      blk.aquifer = matnet::AquiferParams{rng.uniform(1e6, 1e8), rng.uniform(0.5, 50.0), blk.p_init};
    blocks.push_back(std::move(blk));
  }
  std::vector<matnet::Connection> conns;
  for (int i = 0; i < n_blocks; ++i)
    for (int j = i + 1; j < n_blocks; ++j) conns.push_back({i, j, rng.uniform(5.0, 100.0)});
  return matnet::ReservoirNetwork(std::move(blocks), std::move(conns), 1000.0);
}

/// True when [p - margin, p + margin] contains no PVT node of any block.
inline bool clear_of_nodes(const matnet::ReservoirNetwork& net, double p, double margin) {
  for (const auto& b : net.blocks())
    for (double node : b.pvt->pressure_nodes())
      if (std::abs(node - p) <= margin) return false;
  return true;
}

/// Central differences of f at x with per-coordinate steps. The step actually
/// taken is recovered from the perturbed coordinate so representation error
/// in x + h does not enter the quotient.
inline Eigen::MatrixXd central_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd out;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp[k] = x[k] + h[k];
    xm[k] = x[k] - h[k];
    const Eigen::VectorXd fp = f(xp), fm = f(xm);
    if (k == 0) out.resize(fp.size(), n);
    out.col(k) = (fp - fm) / (xp[k] - xm[k]);
  }
  return out;
}

struct JacobianCheck {
  int entries = 0;
  int failures = 0;
  double worst_rel = 0.0;  ///< largest relative error among entries judged relatively
  std::string first_failure;
  bool ok() const { return failures == 0; }
  void merge(const JacobianCheck& o) {
    entries += o.entries;
    failures += o.failures;
    worst_rel = std::max(worst_rel, o.worst_rel);
    if (first_failure.empty()) first_failure = o.first_failure;
  }
};

/// Entry passes when within `rel` relative, or within `abs_tol` absolute when
/// the analytic magnitude is below `small`.
inline JacobianCheck compare_jacobian(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd,
                                      double rel = 1e-6, double abs_tol = 1e-9, double small = 1e-3) {
  JacobianCheck c;
  for (Eigen::Index r = 0; r < analytic.rows(); ++r)
    for (Eigen::Index k = 0; k < analytic.cols(); ++k) {
      const double a = analytic(r, k), f = fd(r, k), err = std::abs(a - f);
      ++c.entries;
      const double scale = std::max(std::abs(a), std::abs(f));
      const bool rel_ok = err <= rel * scale;
      const bool abs_ok = std::abs(a) < small && err <= abs_tol;
      if (scale > 0.0 && std::abs(a) >= small) c.worst_rel = std::max(c.worst_rel, err / scale);
      if (!(rel_ok || abs_ok)) {
        ++c.failures;
        if (c.first_failure.empty()) {
          std::ostringstream os;
          os.precision(12);
          os << "(" << r << "," << k << ") analytic " << a << " fd " << f;
          c.first_failure = os.str();
        }
      }
    }
  return c;
}

/// One randomized history-Jacobian trial on a 3-block network.
inline JacobianCheck history_jacobian_trial(std::uint64_t seed) {
  matnet::Rng rng(seed);
  const auto net = random_network(rng, 3);
  const auto state = matnet::HistoryState::initial(net);
  std::vector<matnet::Cumulatives> cum(net.size());
  for (auto& c : cum) {
    c.np = rng.uniform(0.0, 1e5);
    c.gp = c.np * rng.uniform(300.0, 2000.0);
    c.wp = rng.uniform(0.0, 2e4);
    c.ginj = rng.uniform() < 0.3 ? rng.uniform(0.0, 1e7) : 0.0;
    c.winj = rng.uniform() < 0.3 ? rng.uniform(0.0, 3e4) : 0.0;
  }
  const double dt = rng.uniform(5.0, 60.0);
  matnet::SolverConfig cfg;
  const double h = 1e-3;
  Eigen::VectorXd p(static_cast<Eigen::Index>(net.size()));
  for (std::size_t b = 0; b < net.size(); ++b) {
    double v;
    do v = net.block(b).p_init - rng.uniform(0.0, 1500.0);
    while (!clear_of_nodes(net, v, 10 * h));
    p[static_cast<Eigen::Index>(b)] = v;
  }
  matnet::HistoryStepSystem sys(net, state, cum, dt, cfg);
  const auto fd = central_fd([&](const Eigen::VectorXd& q) { return sys.residual(q); }, p,
                             Eigen::VectorXd::Constant(p.size(), h));
  return compare_jacobian(sys.jacobian(p), fd);
}

/// Finite-difference steps for the forecast unknowns: 1e-3 psi on pressures;
/// cumulatives use max(1, 1e-6 |x|) STB or scf. The volume-balance row carries
/// pore-volume-sized terms, so smaller cumulative steps let roundoff of order
/// 1e-9 rb swamp entries near 1e-3.
inline Eigen::VectorXd forecast_fd_steps(const Eigen::VectorXd& x) {
  Eigen::VectorXd h(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k)
    h[k] = (k % matnet::kUnknownsPerBlock == matnet::kVarP) ? 1e-3 : std::max(1.0, 1e-6 * std::abs(x[k]));
  return h;
}

/// One randomized forecast-Jacobian trial on a synthetic case: the state is
/// the history solution after a random number of steps and the iterate is a
/// random production increment from it. Free gas is kept strictly positive so
/// no phase volume sits on the clamp at zero.
inline JacobianCheck forecast_jacobian_trial(const matnet::SyntheticCase& c, std::uint64_t seed) {
  matnet::Rng rng(seed);
  const auto& net = c.network;
  const std::size_t steps = c.history.steps();
  const std::size_t k = 2 + rng.index(steps - 3);
  const auto hist = matnet::run_history(net, c.history.head(k), matnet::SolverConfig{});
  const auto& state = hist.final_state;
  const matnet::ForecastConfig cfg;
  const double dt = c.controls.times[k] - c.controls.times[k - 1];
  matnet::ForecastStepSystem sys(net, state, c.controls.rows[k], dt, cfg);
  Eigen::VectorXd x = sys.initial_guess();
  for (std::size_t b = 0; b < net.size(); ++b) {
    const auto& blk = net.block(b);
    double p;
    do p = state.p[b] - rng.uniform(0.0, 60.0);
    while (!clear_of_nodes(net, p, 0.01));
    const double dnp = rng.uniform(0.0, 5000.0);
    const double rs = blk.pvt->eval(Property::Rs, p);
    x[matnet::unknown_index(b, matnet::kVarP)] = p;
    x[matnet::unknown_index(b, matnet::kVarNp)] += dnp;
    x[matnet::unknown_index(b, matnet::kVarGp)] += rs * dnp - rng.uniform(1e4, 1e5);
    x[matnet::unknown_index(b, matnet::kVarWp)] += rng.uniform(0.0, 500.0);
  }
  const auto fd = central_fd([&](const Eigen::VectorXd& q) { return sys.residual(q); }, x, forecast_fd_steps(x));
  return compare_jacobian(sys.jacobian(x), fd);
}

/// Linear forward model g(m) = G m with exact data d = G m_true, one ES
/// update at alpha = 0 with perturbed observations d_j = d + sigma e_j.
/// Each member then lands on the least-squares estimate for its own d_j, so
/// the ensemble mean estimates the direct normal-equations solution with
/// standard error sigma sqrt(diag((G^T G)^-1) / N_e). Returns the largest
/// |mean - direct| / SE over parameters.
inline double linear_gaussian_trial(std::uint64_t seed, int n_m = 3, int n_d = 8, int n_e = 60) {
  matnet::Rng rng(seed);
  Eigen::MatrixXd G(n_d, n_m);
  for (int r = 0; r < n_d; ++r)
    for (int c = 0; c < n_m; ++c) G(r, c) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd m_true(n_m);
  for (int c = 0; c < n_m; ++c) m_true[c] = rng.uniform(-2.0, 2.0);
  const Eigen::VectorXd d_obs = G * m_true;
  const double sigma = 0.1;

  Eigen::MatrixXd m(n_m, n_e), d(n_d, n_e);
  for (int j = 0; j < n_e; ++j) {
    for (int c = 0; c < n_m; ++c) m(c, j) = rng.uniform(-3.0, 3.0);
    for (int r = 0; r < n_d; ++r) d(r, j) = d_obs[r] + sigma * rng.normal();
  }
  const Eigen::MatrixXd g = G * m;
  const Eigen::VectorXd cd = Eigen::VectorXd::Constant(n_d, sigma * sigma);
  const Eigen::MatrixXd updated = matnet::es_rlm_update(m, g, d, cd, 0.0);

  const Eigen::MatrixXd gtg = G.transpose() * G;
  const Eigen::VectorXd direct = gtg.ldlt().solve(G.transpose() * d_obs);
  const Eigen::MatrixXd cov = gtg.inverse();
  const Eigen::VectorXd mean = updated.rowwise().mean();
  double worst = 0.0;
  for (int c = 0; c < n_m; ++c) {
    const double se = sigma * std::sqrt(cov(c, c) / n_e);
    worst = std::max(worst, std::abs(mean[c] - direct[c]) / se);
  }
  return worst;
}

/// Brute-force DTW: every monotone path from (0,0) to (N-1,M-1), cost
/// accumulated in path order with the first cell charged the diagonal weight.
inline double dtw_bruteforce(const std::vector<double>& x, const std::vector<double>& y,
                             const matnet::clustering::DtwOptions& opt) {
  using matnet::clustering::LocalMetric;
  auto local = [&](std::size_t i, std::size_t j) {
    const double d = x[i] - y[j];
    return opt.metric == LocalMetric::SquaredEuclidean ? d * d : std::abs(d);
  };
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    if (i == x.size() - 1 && j == y.size() - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < x.size()) walk(i + 1, j, acc + opt.weights.horizontal * local(i + 1, j));
    if (j + 1 < y.size()) walk(i, j + 1, acc + opt.weights.vertical * local(i, j + 1));
    if (i + 1 < x.size() && j + 1 < y.size()) walk(i + 1, j + 1, acc + opt.weights.diagonal * local(i + 1, j + 1));
  };
  walk(0, 0, opt.weights.diagonal * local(0, 0));
  return best;
}

/// Mixed-data partition cost with member means and per-column modes.
inline double mixed_partition_cost(const std::vector<std::vector<double>>& xr,
                                   const std::vector<std::vector<int>>& xc, const std::vector<int>& labels,
                                   int k, double gamma) {
  const std::size_t n = xr.size();
  const std::size_t dn = n ? xr[0].size() : 0, dc = n ? xc[0].size() : 0;
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) members.push_back(i);
    if (members.empty()) continue;
    for (std::size_t d = 0; d < dn; ++d) {
      double mean = 0.0;
      for (auto i : members) mean += xr[i][d];
      mean /= static_cast<double>(members.size());
      for (auto i : members) total += (xr[i][d] - mean) * (xr[i][d] - mean);
    }
    for (std::size_t d = 0; d < dc; ++d) {
      std::vector<int> counts;
      for (auto i : members) {
        if (static_cast<std::size_t>(xc[i][d]) >= counts.size()) counts.resize(xc[i][d] + 1, 0);
        ++counts[xc[i][d]];
      }
      const int mode_count = *std::max_element(counts.begin(), counts.end());
      total += gamma * static_cast<double>(members.size() - mode_count);
    }
  }
  return total;
}

/// Minimum cost over every labeling of n objects into two nonempty groups.
inline double best_two_partition_cost(const std::vector<std::vector<double>>& xr,
                                      const std::vector<std::vector<int>>& xc, double gamma) {
  const std::size_t n = xr.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> labels(n);
  // Object 0 is pinned to group 0; that removes the label-swap duplicate.
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    labels[0] = 0;
    for (std::size_t i = 1; i < n; ++i) labels[i] = static_cast<int>((mask >> (i - 1)) & 1u);
    best = std::min(best, mixed_partition_cost(xr, xc, labels, 2, gamma));
  }
  return best;
}

/// Linear-Bo undersaturated PVT: Bo = boi (1 + co (p_i - p)), Rs constant,
/// Rv = 0, Bw = 1. Nodes every 100 psi keep the table exact for a linear Bo.
inline std::shared_ptr<const matnet::PvtTable> linear_bo_pvt(double p_i, double boi, double co, double rs) {
  matnet::PvtTable::Columns c;
  for (double p = 500.0; p <= p_i + 1000.0; p += 100.0) {
    c.p.push_back(p);
    auto set = [&](Property prop, double v) { c.values[static_cast<std::size_t>(prop)].push_back(v); };
    set(Property::Bo, boi * (1.0 + co * (p_i - p)));
    set(Property::Bg, 5.0 / p);
    set(Property::Bw, 1.0);
    set(Property::Rs, rs);
    set(Property::Rv, 0.0);
    set(Property::MuO, 1.0);
    set(Property::MuG, 0.02);
    set(Property::MuW, 0.5);
    set(Property::RhoO, 45.0);
    set(Property::RhoG, 10.0);
    set(Property::RhoW, 62.4);
  }
  return std::make_shared<const matnet::PvtTable>(std::move(c));
}

inline std::shared_ptr<const matnet::RelPermCurves> quadratic_relperm() {
  std::vector<double> s, kro, krw, krg;
  for (int k = 0; k <= 10; ++k) {
    const double x = 0.1 * k;
    s.push_back(x);
    kro.push_back(x * x);
    krw.push_back(0.5 * x * x);
    krg.push_back(0.8 * x * x);
  }
  return std::make_shared<const matnet::RelPermCurves>(s, kro, krw, krg);
}

/// Single undersaturated tank (no gas cap, no aquifer) on linear_bo_pvt.
struct SingleTank {
  double p_i = 4000.0, boi = 1.3, co = 1e-5, rs = 500.0;
  double n_foi = 1e7, s_wi = 0.2, c_f = 4e-6, c_w = 3e-6;

  double c_e() const { return (c_f + c_w * s_wi) / (1.0 - s_wi); }

  matnet::ReservoirNetwork network() const {
    matnet::Block b;
    b.n_foi = n_foi;
    b.s_wi = s_wi;
    b.c_f = c_f;
    b.c_w = c_w;
    b.p_init = p_i;
    b.z = 8000.0;
    b.pvt = linear_bo_pvt(p_i, boi, co, rs);
    b.relperm = quadratic_relperm();
    return matnet::ReservoirNetwork({b}, {}, 100.0);
  }

  /// Closed-form pressure drop: with Bo linear the balance
  /// N(Bo - Boi) - Np Bo + N Boi ce dp = 0 is linear in dp.
  double pressure(double np) const {
    const double dp = np / (n_foi * (co + c_e()) - np * co);
    return p_i - dp;
  }
};

/// Control-volume oracle for the local residual: current phase volumes minus
/// the compressed pore volume. Equals residual_local when the water
/// compressibility sits inside V_w and only c_f acts on the pore volume.
inline double control_volume_residual(const matnet::Block& blk, double p, const matnet::Cumulatives& cum,
                                      double w_e) {
  const auto v = matnet::phase_volumes(blk, p, cum, w_e);
  const double vp = blk.pore_volume() * (1.0 - blk.c_f * (blk.p_init - p));
  return v.vo + v.vg + v.vw - vp;
}

}  // namespace testsupport

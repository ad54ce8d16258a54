#include "matnet/matbal_history.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matnet/error.hpp"

namespace matnet {

void SolverConfig::validate() const {
  if (!(newton_tol_residual > 0.0)) throw ConfigError("solver: newton_tol_residual must be > 0");
  if (!(newton_tol_update > 0.0)) throw ConfigError("solver: newton_tol_update must be > 0");
  if (max_newton_iters < 1) throw ConfigError("solver: max_newton_iters must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("solver: damping must be in (0,1]");
  if (!(max_dp > 0.0)) throw ConfigError("solver: max_dp must be > 0");
  if (!(flux_unit_constant > 0.0)) throw ConfigError("solver: flux_unit_constant must be > 0");
}

double residual_local(const Block& block, double p, const Cumulatives& cum, double w_e) {
  const auto& t = *block.pvt;
  const double bo = t.eval(Property::Bo, p), bg = t.eval(Property::Bg, p), bw = t.eval(Property::Bw, p);
  const double rs = t.eval(Property::Rs, p), rv = t.eval(Property::Rv, p);
  const double boi = block.b_oi(), bgi = block.b_gi(), rsi = block.r_si(), rvi = block.r_vi();
  const double d = 1.0 - rs * rv;
  if (!(d > 0.0)) throw SingularPvtError("1 - Rs*Rv <= 0 at p = " + std::to_string(p));

  const double oil_exp = bo - boi + bg * (rsi - rs) + rv * (boi * rs - bo * rsi);
  const double gas_exp = bg - bgi + bo * (rvi - rv) + rs * (bgi * rv - bg * rvi);
  const double ce = (block.c_f + block.c_w * block.s_wi) / (1.0 - block.s_wi);
  const double dp = block.p_init - p;

  return block.n_foi * oil_exp / d - cum.np * (bo - rs * bg) / d - cum.gp * (bg - rv * bo) / d +
         block.g_fgi * gas_exp / d - cum.wp * bw + cum.winj * bw + cum.ginj * bg +
         block.hydrocarbon_volume() * ce * dp + w_e;
}

double residual_local_dp(const Block& block, double p, const Cumulatives& cum, double dwe_dp) {
  const auto s = PvtPoint::at(*block.pvt, p);
  const double boi = block.b_oi(), bgi = block.b_gi(), rsi = block.r_si(), rvi = block.r_vi();
  const double d = 1.0 - s.rs * s.rv;
  if (!(d > 0.0)) throw SingularPvtError("1 - Rs*Rv <= 0 at p = " + std::to_string(p));
  const double d2 = d * d;
  const double dprod = s.rs * s.drv + s.rv * s.drs;  // d(Rs Rv)/dp = -dD/dp

  const double oil_exp = s.bo - boi + s.bg * (rsi - s.rs) + s.rv * (boi * s.rs - s.bo * rsi);
  const double oil_exp_dp = s.dbo * (1.0 - s.rv * rsi) + s.dbg * (rsi - s.rs) +
                            s.drs * (s.rv * boi - s.bg) + s.drv * (boi * s.rs - s.bo * rsi);
  const double gas_exp = s.bg - bgi + s.bo * (rvi - s.rv) + s.rs * (bgi * s.rv - s.bg * rvi);
  const double gas_exp_dp = s.dbg * (1.0 - s.rs * rvi) + s.dbo * (rvi - s.rv) +
                            s.drv * (s.rs * bgi - s.bo) + s.drs * (bgi * s.rv - s.bg * rvi);

  const double oil_w = s.bo - s.rs * s.bg;
  const double oil_w_dp = s.dbo - s.rs * s.dbg - s.bg * s.drs;
  const double gas_w = s.bg - s.rv * s.bo;
  const double gas_w_dp = s.dbg - s.rv * s.dbo - s.bo * s.drv;

  const double ce = (block.c_f + block.c_w * block.s_wi) / (1.0 - block.s_wi);

  return -cum.wp * s.dbw + cum.winj * s.dbw + cum.ginj * s.dbg + dwe_dp +
         block.n_foi * (oil_exp_dp / d + dprod * oil_exp / d2) +
         block.g_fgi * (gas_exp_dp / d + dprod * gas_exp / d2) -
         cum.np * (oil_w_dp * d + dprod * oil_w) / d2 - cum.gp * (gas_w_dp * d + dprod * gas_w) / d2 -
         block.hydrocarbon_volume() * ce;
}

ConnectionFlux connection_flux(const Block& bi, const Block& bj, double t_ij, double p_i, double p_j,
                               const Saturations& s_i_lag, const Saturations& s_j_lag, double dt,
                               const SolverConfig& cfg) {
  ConnectionFlux out;
  if (t_ij == 0.0) return out;
  static constexpr std::array<Property, 3> kMu = {Property::MuO, Property::MuG, Property::MuW};
  static constexpr std::array<Property, 3> kRho = {Property::RhoO, Property::RhoG, Property::RhoW};
  const double k = cfg.flux_unit_constant * t_ij * dt;
  const double gdz = cfg.gravity_enabled ? cfg.gravity_psi_per_lbm_ft2 * (bj.z - bi.z) : 0.0;
  for (int a = 0; a < kPhaseCount; ++a) {
    const auto& ti = *bi.pvt;
    const auto& tj = *bj.pvt;
    const double mu = 0.5 * (ti.eval(kMu[a], p_i) + tj.eval(kMu[a], p_j));
    const double dmu_i = 0.5 * ti.eval_dp(kMu[a], p_i);
    const double dmu_j = 0.5 * tj.eval_dp(kMu[a], p_j);
    const double rho = 0.5 * (ti.eval(kRho[a], p_i) + tj.eval(kRho[a], p_j));
    const double drho_i = 0.5 * ti.eval_dp(kRho[a], p_i);
    const double drho_j = 0.5 * tj.eval_dp(kRho[a], p_j);
    const double phi = p_j - p_i - rho * gdz;
    // Upstream block supplies the (lagged) relative permeability.
    const double kr = phi > 0.0 ? bj.relperm->kr(a, s_j_lag.of(a)) : bi.relperm->kr(a, s_i_lag.of(a));
    if (kr == 0.0) continue;
    const double c = k * kr;
    out.flux[a] = c * phi / mu;
    out.d_dpi[a] = c * ((-1.0 - gdz * drho_i) / mu - phi * dmu_i / (mu * mu));
    out.d_dpj[a] = c * ((1.0 - gdz * drho_j) / mu - phi * dmu_j / (mu * mu));
  }
  return out;
}

double residual_nonlocal(const ReservoirNetwork& net, std::size_t i,
                         std::span<const std::vector<double>> pressures,
                         std::span<const std::vector<Saturations>> lagged_sats,
                         std::span<const double> dts, const SolverConfig& cfg) {
  if (pressures.size() != dts.size() || lagged_sats.size() != dts.size())
    throw Error("residual_nonlocal: history length mismatch");
  double total = 0.0;
  for (std::size_t m = 0; m < dts.size(); ++m) {
    for (std::size_t j = 0; j < net.size(); ++j) {
      const double t = net.transmissibility(i, j);
      if (t == 0.0) continue;
      auto f = connection_flux(net.block(i), net.block(j), t, pressures[m][i], pressures[m][j],
                               lagged_sats[m][i], lagged_sats[m][j], dts[m], cfg);
      total += f.flux[0] + f.flux[1] + f.flux[2];
    }
  }
  return total;
}

HistoryState HistoryState::initial(const ReservoirNetwork& net) {
  HistoryState s;
  const std::size_t n = net.size();
  s.p.resize(n);
  s.sat.resize(n);
  s.cum.assign(n, Cumulatives{});
  s.aquifers.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    const auto& blk = net.block(b);
    s.p[b] = blk.p_init;
    s.sat[b] = saturations(phase_volumes(blk, blk.p_init, {}, 0.0));
    s.aquifers.emplace_back(blk.aquifer);
  }
  s.conn_flux.assign(net.connections().size(), {0.0, 0.0, 0.0});
  return s;
}

std::array<double, 3> HistoryState::net_influx(const ReservoirNetwork& net, std::size_t b) const {
  std::array<double, 3> in{0.0, 0.0, 0.0};
  for (auto k : net.incident(b)) {
    const double sign = static_cast<std::size_t>(net.connections()[k].i) == b ? 1.0 : -1.0;
    for (int a = 0; a < kPhaseCount; ++a) in[a] += sign * conn_flux[k][a];
  }
  return in;
}

void HistoryState::advance(const ReservoirNetwork& net, double dt, std::vector<double> p_new,
                           std::vector<Cumulatives> cum_new,
                           const std::vector<std::array<double, 3>>& step_flux) {
  for (std::size_t k = 0; k < conn_flux.size(); ++k)
    for (int a = 0; a < kPhaseCount; ++a) conn_flux[k][a] += step_flux[k][a];
  for (std::size_t b = 0; b < net.size(); ++b) aquifers[b].commit(p_new[b], dt);
  p = std::move(p_new);
  cum = std::move(cum_new);
  for (std::size_t b = 0; b < net.size(); ++b)
    sat[b] = saturations(phase_volumes(net.block(b), p[b], cum[b], w_e(b), net_influx(net, b)));
  ++step;
  time += dt;
}

HistoryStepSystem::HistoryStepSystem(const ReservoirNetwork& net, const HistoryState& state,
                                     std::vector<Cumulatives> cum_next, double dt,
                                     const SolverConfig& cfg)
    : net_(net), state_(state), cum_(std::move(cum_next)), dt_(dt), cfg_(cfg) {
  ledger_.resize(net.size());
  for (std::size_t b = 0; b < net.size(); ++b) {
    auto in = state.net_influx(net, b);
    ledger_[b] = in[0] + in[1] + in[2];
  }
}

std::vector<std::array<double, 3>> HistoryStepSystem::step_flux(const Eigen::VectorXd& p) const {
  const auto& conns = net_.connections();
  std::vector<std::array<double, 3>> out(conns.size());
  for (std::size_t k = 0; k < conns.size(); ++k) {
    const auto i = static_cast<std::size_t>(conns[k].i), j = static_cast<std::size_t>(conns[k].j);
    out[k] = connection_flux(net_.block(i), net_.block(j), conns[k].t, p[i], p[j], state_.sat[i],
                             state_.sat[j], dt_, cfg_)
                 .flux;
  }
  return out;
}

Eigen::VectorXd HistoryStepSystem::residual(const Eigen::VectorXd& p) const {
  const std::size_t n = net_.size();
  Eigen::VectorXd r(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double we = state_.aquifers[b].influx(p[b], dt_);
    r[b] = residual_local(net_.block(b), p[b], cum_[b], we) + ledger_[b];
  }
  // Each connection is evaluated once; the flux enters i and leaves j.
  const auto flux = step_flux(p);
  const auto& conns = net_.connections();
  for (std::size_t k = 0; k < conns.size(); ++k) {
    const double f = flux[k][0] + flux[k][1] + flux[k][2];
    r[conns[k].i] += f;
    r[conns[k].j] -= f;
  }
  return r;
}

Eigen::MatrixXd HistoryStepSystem::jacobian(const Eigen::VectorXd& p) const {
  const std::size_t n = net_.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < n; ++b)
    jac(b, b) = residual_local_dp(net_.block(b), p[b], cum_[b], state_.aquifers[b].dinflux_dp(dt_));
  for (const auto& c : net_.connections()) {
    const auto i = static_cast<std::size_t>(c.i), j = static_cast<std::size_t>(c.j);
    auto f = connection_flux(net_.block(i), net_.block(j), c.t, p[i], p[j], state_.sat[i],
                             state_.sat[j], dt_, cfg_);
    const double di = f.d_dpi[0] + f.d_dpi[1] + f.d_dpi[2];
    const double dj = f.d_dpj[0] + f.d_dpj[1] + f.d_dpj[2];
    jac(i, i) += di;
    jac(i, j) += dj;
    jac(j, i) -= di;
    jac(j, j) -= dj;
  }
  return jac;
}

Eigen::VectorXd dense_solve(const Eigen::MatrixXd& J, const Eigen::VectorXd& b) {
  if (!J.allFinite() || !b.allFinite()) throw LinearSolveError("non-finite Jacobian or right-hand side");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
  if (!lu.isInvertible()) throw LinearSolveError("singular Jacobian");
  Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite()) throw LinearSolveError("non-finite Newton update");
  return x;
}

StepResult solve_step(const ReservoirNetwork& net, const HistoryState& state,
                      const std::vector<Cumulatives>& cum_next, double dt, const SolverConfig& cfg) {
  HistoryStepSystem sys(net, state, cum_next, dt, cfg);
  const std::size_t n = net.size();
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(state.p.data(), static_cast<Eigen::Index>(n));
  StepResult out;
  double last_update = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= cfg.max_newton_iters; ++it) {
    Eigen::VectorXd r = sys.residual(p);
    const double rnorm = r.lpNorm<Eigen::Infinity>();
    out.residual_norms.push_back(rnorm);
    if (!std::isfinite(rnorm)) break;
    if (it > 0 && rnorm < cfg.newton_tol_residual && last_update < cfg.newton_tol_update) {
      out.p.assign(p.data(), p.data() + n);
      out.iterations = it;
      out.final_residual = r;
      out.step_flux = sys.step_flux(p);
      return out;
    }
    if (it == cfg.max_newton_iters) break;
    Eigen::VectorXd delta = dense_solve(sys.jacobian(p), -r) * cfg.damping;
    const double dmax = delta.lpNorm<Eigen::Infinity>();
    if (dmax > cfg.max_dp) delta *= cfg.max_dp / dmax;
    // Keep every pressure positive.
    double scale = 1.0;
    for (std::size_t b = 0; b < n; ++b)
      if (p[b] + delta[b] <= 0.0) scale = std::min(scale, 0.5 * p[b] / -delta[b]);
    delta *= scale;
    p += delta;
    last_update = delta.lpNorm<Eigen::Infinity>();
  }
  throw NonconvergenceError("history step did not converge", state.step + 1,
                            out.residual_norms.empty() ? NAN : out.residual_norms.back(),
                            std::vector<double>(p.data(), p.data() + n));
}

namespace {

bool incompressible(const Block& b) {
  for (auto prop : {Property::Bo, Property::Bg, Property::Bw, Property::Rs, Property::Rv}) {
    auto col = b.pvt->column(prop);
    if (std::any_of(col.begin(), col.end(), [&](double v) { return v != col.front(); })) return false;
  }
  return b.c_f == 0.0 && b.c_w == 0.0 && !b.aquifer;
}

}  // namespace

void check_solvable(const ReservoirNetwork& net) {
  bool all = true;
  for (std::size_t b = 0; b < net.size(); ++b) {
    const bool inc = incompressible(net.block(b));
    if (inc && net.incident(b).empty())
      throw ConfigError("block " + std::to_string(b) + " is incompressible and isolated (singular)");
    all = all && inc;
  }
  if (all) throw ConfigError("every block is incompressible; pressure system is singular");
}

HistoryResult run_history(const ReservoirNetwork& net, const HistorySchedule& schedule,
                          const SolverConfig& cfg) {
  net.validate();
  cfg.validate();
  schedule.validate(net.size());
  check_solvable(net);

  HistoryResult res;
  HistoryState state = HistoryState::initial(net);
  auto record_of = [&](const HistoryState& s) {
    HistoryRecord r;
    r.time = s.time;
    r.p = s.p;
    r.sat = s.sat;
    for (std::size_t b = 0; b < net.size(); ++b) r.we.push_back(s.w_e(b));
    r.step_flux.assign(net.connections().size(), {0.0, 0.0, 0.0});
    r.residual.assign(net.size(), 0.0);
    return r;
  };
  res.records.push_back(record_of(state));

  for (std::size_t n = 0; n < schedule.steps(); ++n) {
    const double t = schedule.times[n];
    if (t == 0.0) {
      for (const auto& c : schedule.cum[n])
        if (c.np != 0.0 || c.gp != 0.0 || c.wp != 0.0 || c.ginj != 0.0 || c.winj != 0.0)
          throw ConfigError("history schedule: cumulatives at t = 0 must be zero");
      continue;
    }
    const double dt = t - state.time;
    StepResult sr;
    try {
      sr = solve_step(net, state, schedule.cum[n], dt, cfg);
    } catch (const NonconvergenceError& e) {
      throw NonconvergenceError("history step " + std::to_string(n) + " (t = " + std::to_string(t) +
                                    ") did not converge",
                                n, e.residual_norm(), e.last_iterate());
    }
    state.advance(net, dt, sr.p, schedule.cum[n], sr.step_flux);
    state.time = t;
    auto rec = record_of(state);
    rec.step_flux = sr.step_flux;
    rec.residual.assign(sr.final_residual.data(), sr.final_residual.data() + sr.final_residual.size());
    rec.iterations = sr.iterations;
    rec.residual_norms = sr.residual_norms;
    res.records.push_back(std::move(rec));
  }
  res.final_state = std::move(state);
  return res;
}

}  // namespace matnet

#include "matnet/matbal_forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matnet/error.hpp"

namespace matnet {

void ForecastConfig::validate() const {
  newton.validate();
  if (!(kro_floor > 0.0)) throw ConfigError("forecast: kro_floor must be > 0");
  if (max_halvings < 0) throw ConfigError("forecast: max_halvings must be >= 0");
}

double vogel_factor(double pwf, double p) {
  const double x = pwf / p;
  return 1.0 - 0.2 * x - 0.8 * x * x;
}

double vogel_factor_dp(double pwf, double p) {
  const double x = pwf / p;
  return (0.2 + 1.6 * x) * pwf / (p * p);
}

SaturationSensitivity saturation_sensitivity(const Block& block, double p, const Cumulatives& cum,
                                             double w_e, double dwe_dp,
                                             const std::array<double, 3>& influx) {
  const auto s = PvtPoint::at(*block.pvt, p);
  const double d = 1.0 - s.rs * s.rv;
  if (!(d > 0.0)) throw SingularPvtError("1 - Rs*Rv <= 0 at p = " + std::to_string(p));
  const auto fp = free_phase_components(block, p, cum.np, cum.gp);
  const double oil_left = block.oil_in_place() - cum.np;
  const double gas_left = block.gas_in_place() - cum.gp;
  const double dprod = s.drs * s.rv + s.rs * s.drv;

  const double dnfo_dp = (-gas_left * s.drv + fp.n_fo * dprod) / d;
  const double dgfg_dp = (-oil_left * s.drs + fp.g_fg * dprod) / d;

  const auto v = phase_volumes(block, p, cum, w_e, influx);
  std::array<double, 3> vol = {v.vo, v.vg, v.vw};
  std::array<std::array<double, 4>, 3> dv{};
  dv[kOil] = {s.dbo * fp.n_fo + s.bo * dnfo_dp, -s.bo / d, s.bo * s.rv / d, 0.0};
  dv[kGas] = {s.dbg * (fp.g_fg + cum.ginj) + s.bg * dgfg_dp, s.bg * s.rs / d, -s.bg / d, 0.0};
  dv[kWater] = {dwe_dp - s.dbw * cum.wp + s.dbw * cum.winj - block.pore_volume() * block.s_wi * block.c_w,
                0.0, 0.0, -s.bw};
  for (int a = 0; a < kPhaseCount; ++a)
    if (vol[a] < 0.0) {
      vol[a] = 0.0;
      dv[a] = {0.0, 0.0, 0.0, 0.0};
    }

  SaturationSensitivity out;
  out.s = saturations(v);
  const double total = vol[0] + vol[1] + vol[2];
  for (int k = 0; k < 4; ++k) {
    const double dtot = dv[0][k] + dv[1][k] + dv[2][k];
    for (int a = 0; a < kPhaseCount; ++a)
      out.ds[a][k] = dv[a][k] / total - vol[a] * dtot / (total * total);
  }
  return out;
}

ForecastStepSystem::ForecastStepSystem(const ReservoirNetwork& net, const HistoryState& state,
                                       std::vector<ForecastControl> controls, double dt,
                                       const ForecastConfig& cfg)
    : net_(net), state_(state), controls_(std::move(controls)), dt_(dt), cfg_(cfg) {
  ledger_.resize(net.size());
  producers_.resize(net.size());
  for (std::size_t b = 0; b < net.size(); ++b) {
    auto in = state.net_influx(net, b);
    ledger_[b] = in[0] + in[1] + in[2];
    producers_[b] = state.p[b] > controls_[b].pwf ? controls_[b].n_producers : 0;
  }
}

Eigen::VectorXd ForecastStepSystem::initial_guess() const {
  Eigen::VectorXd x(size());
  for (std::size_t b = 0; b < net_.size(); ++b) {
    x[unknown_index(b, kVarP)] = state_.p[b];
    x[unknown_index(b, kVarNp)] = state_.cum[b].np;
    x[unknown_index(b, kVarGp)] = state_.cum[b].gp;
    x[unknown_index(b, kVarWp)] = state_.cum[b].wp;
  }
  return x;
}

Cumulatives ForecastStepSystem::cumulatives(std::size_t b, const Eigen::VectorXd& x) const {
  Cumulatives c;
  c.np = x[unknown_index(b, kVarNp)];
  c.gp = x[unknown_index(b, kVarGp)];
  c.wp = x[unknown_index(b, kVarWp)];
  c.ginj = controls_[b].ginj;
  c.winj = controls_[b].winj;
  return c;
}

double ForecastStepSystem::unknown_scale(std::size_t b, int var) const {
  const auto& blk = net_.block(b);
  switch (var) {
    case kVarP: return 1.0;
    case kVarGp: return std::max(1.0, blk.gas_in_place());
    default: return std::max(1.0, blk.oil_in_place());
  }
}

double ForecastStepSystem::residual_scale(std::size_t b, int var) const {
  if (var != kVarWp) return 1.0;
  // Row 4 (the GOR closure) is in scf; compare it on a per-STB basis.
  const auto& blk = net_.block(b);
  return std::max(1.0, blk.gas_in_place() / std::max(1.0, blk.oil_in_place()));
}

double ForecastStepSystem::r1(std::size_t b, const Eigen::VectorXd& x) const {
  const double p = x[unknown_index(b, kVarP)];
  double r = residual_local(net_.block(b), p, cumulatives(b, x), state_.aquifers[b].influx(p, dt_)) +
             ledger_[b];
  const auto& conns = net_.connections();
  for (auto k : net_.incident(b)) {
    const auto i = static_cast<std::size_t>(conns[k].i), j = static_cast<std::size_t>(conns[k].j);
    auto f = connection_flux(net_.block(i), net_.block(j), conns[k].t, x[unknown_index(i, kVarP)],
                             x[unknown_index(j, kVarP)], state_.sat[i], state_.sat[j], dt_, cfg_.newton);
    const double total = f.flux[0] + f.flux[1] + f.flux[2];
    r += (i == b) ? total : -total;
  }
  return r;
}

double ForecastStepSystem::r2(std::size_t b, const Eigen::VectorXd& x) const {
  const double p = x[unknown_index(b, kVarP)];
  const double dnp = x[unknown_index(b, kVarNp)] - state_.cum[b].np;
  const double dwp = x[unknown_index(b, kVarWp)] - state_.cum[b].wp;
  const auto& c = controls_[b];
  return dwp + dnp - vogel_factor(c.pwf, p) * dt_ * c.qlmax * producers_[b];
}

ForecastStepSystem::Ratios ForecastStepSystem::ratios(std::size_t b, const Eigen::VectorXd& x) const {
  const auto& blk = net_.block(b);
  const double p = x[unknown_index(b, kVarP)];
  const auto& aq = state_.aquifers[b];
  const auto ss = saturation_sensitivity(blk, p, cumulatives(b, x), aq.influx(p, dt_),
                                         aq.dinflux_dp(dt_), state_.net_influx(net_, b));
  const auto pv = PvtPoint::at(*blk.pvt, p);
  const auto& kr = *blk.relperm;

  double kro = kr.kro(ss.s.so);
  double dkro = kr.dkro(ss.s.so);
  if (kro < cfg_.kro_floor) {
    kro = cfg_.kro_floor;
    dkro = 0.0;
  }
  const double krw = kr.krw(ss.s.sw), dkrw = kr.dkrw(ss.s.sw);
  const double krg = kr.krg(ss.s.sg), dkrg = kr.dkrg(ss.s.sg);

  const double mw = pv.muo * pv.bo / (pv.muw * pv.bw);
  const double mw_dp = mw * (pv.dmuo / pv.muo + pv.dbo / pv.bo - pv.dmuw / pv.muw - pv.dbw / pv.bw);
  const double mg = pv.muo * pv.bo / (pv.mug * pv.bg);
  const double mg_dp = mg * (pv.dmuo / pv.muo + pv.dbo / pv.bo - pv.dmug / pv.mug - pv.dbg / pv.bg);

  Ratios r{};
  r.wor = krw / kro * mw;
  r.gor = pv.rs + krg / kro * mg;
  for (int k = 0; k < 4; ++k) {
    const double dkro_k = dkro * ss.ds[kOil][k];
    const double dwk = (dkrw * ss.ds[kWater][k] * kro - krw * dkro_k) / (kro * kro);
    const double dgk = (dkrg * ss.ds[kGas][k] * kro - krg * dkro_k) / (kro * kro);
    r.dwor[k] = dwk * mw;
    r.dgor[k] = dgk * mg;
  }
  r.dwor[kVarP] += krw / kro * mw_dp;
  r.dgor[kVarP] += pv.drs + krg / kro * mg_dp;
  return r;
}

double ForecastStepSystem::wor(std::size_t b, const Eigen::VectorXd& x) const { return ratios(b, x).wor; }
double ForecastStepSystem::gor(std::size_t b, const Eigen::VectorXd& x) const { return ratios(b, x).gor; }

double ForecastStepSystem::r3(std::size_t b, const Eigen::VectorXd& x) const {
  const double dnp = x[unknown_index(b, kVarNp)] - state_.cum[b].np;
  const double dwp = x[unknown_index(b, kVarWp)] - state_.cum[b].wp;
  return wor(b, x) * dnp - dwp;
}

double ForecastStepSystem::r4(std::size_t b, const Eigen::VectorXd& x) const {
  const double dnp = x[unknown_index(b, kVarNp)] - state_.cum[b].np;
  const double dgp = x[unknown_index(b, kVarGp)] - state_.cum[b].gp;
  return gor(b, x) * dnp - dgp;
}

Eigen::VectorXd ForecastStepSystem::residual(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r(size());
  for (std::size_t b = 0; b < net_.size(); ++b) {
    const double dnp = x[unknown_index(b, kVarNp)] - state_.cum[b].np;
    const double dgp = x[unknown_index(b, kVarGp)] - state_.cum[b].gp;
    const double dwp = x[unknown_index(b, kVarWp)] - state_.cum[b].wp;
    const auto rt = ratios(b, x);
    r[unknown_index(b, 0)] = r1(b, x);
    r[unknown_index(b, 1)] = r2(b, x);
    r[unknown_index(b, 2)] = rt.wor * dnp - dwp;
    r[unknown_index(b, 3)] = rt.gor * dnp - dgp;
  }
  return r;
}

Eigen::MatrixXd ForecastStepSystem::jacobian(const Eigen::VectorXd& x) const {
  const std::size_t n = net_.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(size(), size());
  for (std::size_t b = 0; b < n; ++b) {
    const auto& blk = net_.block(b);
    const double p = x[unknown_index(b, kVarP)];
    const auto cum = cumulatives(b, x);
    const auto pv = PvtPoint::at(*blk.pvt, p);
    const double d = 1.0 - pv.rs * pv.rv;
    const Eigen::Index row1 = unknown_index(b, 0), row2 = unknown_index(b, 1),
                       row3 = unknown_index(b, 2), row4 = unknown_index(b, 3);
    const Eigen::Index cp = unknown_index(b, kVarP), cn = unknown_index(b, kVarNp),
                       cg = unknown_index(b, kVarGp), cw = unknown_index(b, kVarWp);

    jac(row1, cp) = residual_local_dp(blk, p, cum, state_.aquifers[b].dinflux_dp(dt_));
    jac(row1, cn) = -(pv.bo - pv.rs * pv.bg) / d;
    jac(row1, cg) = -(pv.bg - pv.rv * pv.bo) / d;
    jac(row1, cw) = -pv.bw;

    const auto& c = controls_[b];
    jac(row2, cp) = -vogel_factor_dp(c.pwf, p) * dt_ * c.qlmax * producers_[b];
    jac(row2, cn) = 1.0;
    jac(row2, cw) = 1.0;

    const double dnp = cum.np - state_.cum[b].np;
    const auto rt = ratios(b, x);
    for (int k = 0; k < 4; ++k) {
      jac(row3, unknown_index(b, k)) = rt.dwor[k] * dnp;
      jac(row4, unknown_index(b, k)) = rt.dgor[k] * dnp;
    }
    jac(row3, cn) += rt.wor;
    jac(row3, cw) -= 1.0;
    jac(row4, cn) += rt.gor;
    jac(row4, cg) -= 1.0;
  }
  for (const auto& c : net_.connections()) {
    const auto i = static_cast<std::size_t>(c.i), j = static_cast<std::size_t>(c.j);
    auto f = connection_flux(net_.block(i), net_.block(j), c.t, x[unknown_index(i, kVarP)],
                             x[unknown_index(j, kVarP)], state_.sat[i], state_.sat[j], dt_, cfg_.newton);
    const double di = f.d_dpi[0] + f.d_dpi[1] + f.d_dpi[2];
    const double dj = f.d_dpj[0] + f.d_dpj[1] + f.d_dpj[2];
    const auto ri = unknown_index(i, 0), rj = unknown_index(j, 0);
    const auto pi = unknown_index(i, kVarP), pj = unknown_index(j, kVarP);
    jac(ri, pi) += di;
    jac(ri, pj) += dj;
    jac(rj, pi) -= di;
    jac(rj, pj) -= dj;
  }
  return jac;
}

std::vector<std::array<double, 3>> ForecastStepSystem::step_flux(const Eigen::VectorXd& x) const {
  const auto& conns = net_.connections();
  std::vector<std::array<double, 3>> out(conns.size());
  for (std::size_t k = 0; k < conns.size(); ++k) {
    const auto i = static_cast<std::size_t>(conns[k].i), j = static_cast<std::size_t>(conns[k].j);
    out[k] = connection_flux(net_.block(i), net_.block(j), conns[k].t, x[unknown_index(i, kVarP)],
                             x[unknown_index(j, kVarP)], state_.sat[i], state_.sat[j], dt_, cfg_.newton)
                 .flux;
  }
  return out;
}

std::vector<std::pair<int, int>> forecast_jacobian_pattern(const ReservoirNetwork& net) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(net.size());
  for (int b = 0; b < n; ++b) {
    for (int r = 0; r < kUnknownsPerBlock; ++r) {
      const int row = b * kUnknownsPerBlock + r;
      for (int other = 0; other < n; ++other) {
        if (other == b) {
          for (int k = 0; k < kUnknownsPerBlock; ++k) out.emplace_back(row, b * kUnknownsPerBlock + k);
        } else if (r == 0 && net.transmissibility(b, other) > 0.0) {
          out.emplace_back(row, other * kUnknownsPerBlock + kVarP);
        }
      }
    }
  }
  return out;
}

namespace {

struct StepOutcome {
  bool ok = false;
  Eigen::VectorXd x;
  int iterations = 0;
  bool below_pwf = false;
};

StepOutcome newton_forecast(const ForecastStepSystem& sys, const ReservoirNetwork& net,
                            const std::vector<ForecastControl>& ctl,
                            const ForecastConfig& cfg) {
  const auto& nc = cfg.newton;
  const std::size_t nb = net.size();
  const auto dim = static_cast<Eigen::Index>(sys.size());
  StepOutcome out;
  Eigen::VectorXd x = sys.initial_guess();
  Eigen::VectorXd col_scale(dim);
  for (std::size_t b = 0; b < nb; ++b)
    for (int v = 0; v < kUnknownsPerBlock; ++v) col_scale[unknown_index(b, v)] = sys.unknown_scale(b, v);

  Eigen::VectorXd last_delta = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  for (int it = 0; it <= nc.max_newton_iters; ++it) {
    Eigen::VectorXd r = sys.residual(x);
    if (!r.allFinite()) return out;
    bool converged = it > 0;
    for (std::size_t b = 0; b < nb && converged; ++b) {
      for (int v = 0; v < kUnknownsPerBlock; ++v) {
        const auto k = unknown_index(b, v);
        if (std::abs(r[k]) >= nc.newton_tol_residual * sys.residual_scale(b, v)) converged = false;
        const double utol = v == kVarP ? nc.newton_tol_update
                                       : nc.newton_tol_residual * (v == kVarGp ? sys.residual_scale(b, 3) : 1.0);
        if (std::abs(last_delta[k]) >= utol) converged = false;
      }
    }
    if (converged) {
      out.ok = true;
      out.x = x;
      out.iterations = it;
      return out;
    }
    if (it == nc.max_newton_iters) break;

    // Column scaling by the unknown scales, row equilibration by max magnitude.
    Eigen::MatrixXd jac = sys.jacobian(x) * col_scale.asDiagonal();
    Eigen::VectorXd row_scale(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double m = jac.row(i).cwiseAbs().maxCoeff();
      row_scale[i] = m > 0.0 ? 1.0 / m : 1.0;
    }
    jac = row_scale.asDiagonal() * jac;
    Eigen::VectorXd delta;
    try {
      delta = col_scale.cwiseProduct(dense_solve(jac, -row_scale.cwiseProduct(r))) * nc.damping;
    } catch (const LinearSolveError&) {
      return out;
    }
    double scale = 1.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double p = x[unknown_index(b, kVarP)];
      const double dp = delta[unknown_index(b, kVarP)];
      if (std::abs(dp) > nc.max_dp) scale = std::min(scale, nc.max_dp / std::abs(dp));
      if (p + dp <= 0.0) scale = std::min(scale, 0.5 * p / -dp);
    }
    delta *= scale;
    x += delta;
    last_delta = delta;
    for (std::size_t b = 0; b < nb; ++b)
      if (x[unknown_index(b, kVarP)] <= ctl[b].pwf && sys.active_producers(b) > 0) out.below_pwf = true;
  }
  return out;
}

}  // namespace

ForecastResult run_forecast(const ReservoirNetwork& net, const ForecastSchedule& schedule,
                            const HistoryState& initial, const ForecastConfig& cfg) {
  net.validate();
  cfg.validate();
  schedule.validate(net.size());
  check_solvable(net);
  const std::size_t nb = net.size();

  ForecastResult res;
  HistoryState state = initial;
  for (std::size_t n = 0; n < schedule.steps(); ++n) {
    const double t_end = schedule.times[n];
    if (!(t_end > state.time)) throw ConfigError("forecast schedule: times must follow the initial state");
    const double t_start = state.time;
    const auto& row = schedule.rows[n];
    const std::vector<Cumulatives> cum_start = state.cum;

    ForecastRecord rec;
    rec.substeps = 0;
    double dt = t_end - t_start;
    const double dt_floor = dt / std::ldexp(1.0, cfg.max_halvings);
    while (state.time < t_end) {
      const bool last = dt >= (t_end - state.time) * (1.0 - 1e-12);
      if (last) dt = t_end - state.time;
      // Injection cumulatives are interpolated linearly across the interval.
      const double frac = last ? 1.0 : (state.time + dt - t_start) / (t_end - t_start);
      std::vector<ForecastControl> ctl = row;
      for (std::size_t b = 0; b < nb; ++b) {
        ctl[b].ginj = cum_start[b].ginj + frac * (row[b].ginj - cum_start[b].ginj);
        ctl[b].winj = cum_start[b].winj + frac * (row[b].winj - cum_start[b].winj);
      }
      StepOutcome out;
      try {
        ForecastStepSystem sys(net, state, ctl, dt, cfg);
        out = newton_forecast(sys, net, ctl, cfg);
        if (out.ok) {
          for (std::size_t b = 0; b < nb && out.ok; ++b) {
            const auto cum = sys.cumulatives(b, out.x);
            const double tol_o = 1e-9 * sys.unknown_scale(b, kVarNp);
            const double tol_g = 1e-9 * sys.unknown_scale(b, kVarGp);
            if (cum.np < state.cum[b].np - tol_o || cum.wp < state.cum[b].wp - tol_o ||
                cum.gp < state.cum[b].gp - tol_g)
              out.ok = false;
          }
        }
        if (out.ok) {
          std::vector<double> p(nb);
          std::vector<Cumulatives> cum(nb);
          for (std::size_t b = 0; b < nb; ++b) {
            p[b] = out.x[unknown_index(b, kVarP)];
            cum[b] = sys.cumulatives(b, out.x);
            cum[b].np = std::max(cum[b].np, state.cum[b].np);
            cum[b].gp = std::max(cum[b].gp, state.cum[b].gp);
            cum[b].wp = std::max(cum[b].wp, state.cum[b].wp);
          }
          const auto flux = sys.step_flux(out.x);
          state.advance(net, dt, std::move(p), std::move(cum), flux);
          if (last) state.time = t_end;
          rec.iterations += out.iterations;
          rec.below_pwf = rec.below_pwf || out.below_pwf;
          ++rec.substeps;
          continue;
        }
      } catch (const SingularPvtError&) {
        out.ok = false;
      }
      if (dt <= dt_floor * (1.0 + 1e-12))
        throw NonconvergenceError("forecast interval " + std::to_string(n) + " (t = " +
                                      std::to_string(t_end) + ") failed at the minimum sub-step",
                                  n, NAN, state.p);
      dt *= 0.5;
    }
    rec.time = t_end;
    for (std::size_t b = 0; b < nb; ++b) {
      rec.p.push_back(state.p[b]);
      rec.np.push_back(state.cum[b].np);
      rec.gp.push_back(state.cum[b].gp);
      rec.wp.push_back(state.cum[b].wp);
    }
    res.records.push_back(std::move(rec));
  }
  res.final_state = std::move(state);
  return res;
}

}  // namespace matnet

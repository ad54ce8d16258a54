#include "matnet/reservoir_model.hpp"

#include <algorithm>
#include <cmath>

#include "matnet/error.hpp"

namespace matnet {

void Block::validate() const {
  const std::string who = "block " + std::to_string(id);
  if (!pvt || pvt->empty()) throw ConfigError(who + ": missing PVT table");
  if (!relperm) throw ConfigError(who + ": missing relative permeability curves");
  if (!(n_foi >= 0.0)) throw ConfigError(who + ": n_foi must be >= 0");
  if (!(g_fgi >= 0.0)) throw ConfigError(who + ": g_fgi must be >= 0");
  if (!(n_foi > 0.0 || g_fgi > 0.0)) throw ConfigError(who + ": block holds no hydrocarbon");
  if (!(s_wi >= 0.0 && s_wi < 1.0)) throw ConfigError(who + ": s_wi must be in [0,1)");
  if (!(c_f >= 0.0)) throw ConfigError(who + ": c_f must be >= 0");
  if (!(c_w >= 0.0)) throw ConfigError(who + ": c_w must be >= 0");
  if (!(p_init > 0.0)) throw ConfigError(who + ": p_init must be > 0");
  if (!std::isfinite(z)) throw ConfigError(who + ": z must be finite");
  if (aquifer) {
    aquifer->validate();
    if (aquifer->p_init != p_init)
      throw ConfigError(who + ": aquifer initial pressure must equal the block's");
  }
}

double Block::hydrocarbon_volume() const { return n_foi * b_oi() + g_fgi * b_gi(); }

double Block::pore_volume() const { return hydrocarbon_volume() / (1.0 - s_wi); }

ReservoirNetwork::ReservoirNetwork(std::vector<Block> blocks, std::vector<Connection> connections,
                                   double t_max)
    : blocks_(std::move(blocks)), t_max_(t_max) {
  for (auto c : connections) {
    if (c.i > c.j) std::swap(c.i, c.j);
    connections_.push_back(c);
  }
  incident_.assign(blocks_.size(), {});
  for (std::size_t k = 0; k < connections_.size(); ++k) {
    const auto& c = connections_[k];
    if (c.i < 0 || c.j < 0 || static_cast<std::size_t>(c.j) >= blocks_.size())
      throw ConfigError("connection " + std::to_string(k) + ": block index out of range");
    incident_[c.i].push_back(k);
    incident_[c.j].push_back(k);
  }
}

double ReservoirNetwork::transmissibility(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  for (auto k : incident_.at(i)) {
    const auto& c = connections_[k];
    const auto a = static_cast<std::size_t>(c.i), b = static_cast<std::size_t>(c.j);
    if ((a == i && b == j) || (a == j && b == i)) return c.t;
  }
  return 0.0;
}

void ReservoirNetwork::validate() const {
  if (blocks_.empty()) throw ConfigError("network: no blocks");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].id != static_cast<int>(b))
      throw ConfigError("network: block ids must be 0..N-1 in order (got " +
                        std::to_string(blocks_[b].id) + " at position " + std::to_string(b) + ")");
    blocks_[b].validate();
  }
  if (!(t_max_ >= 0.0)) throw ConfigError("network: t_max must be >= 0");
  for (std::size_t k = 0; k < connections_.size(); ++k) {
    const auto& c = connections_[k];
    const std::string who = "connection " + std::to_string(k);
    if (c.i == c.j) throw ConfigError(who + ": self-loop");
    if (!(c.t >= 0.0)) throw ConfigError(who + ": transmissibility must be >= 0");
    if (c.t > t_max_) throw ConfigError(who + ": transmissibility exceeds t_max");
    for (std::size_t m = 0; m < k; ++m)
      if (connections_[m].i == c.i && connections_[m].j == c.j)
        throw ConfigError(who + ": duplicate connection");
  }
}

namespace {

void check_cumulative_series(const std::vector<double>& v, const std::string& what) {
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!std::isfinite(v[n]) || v[n] < 0.0) throw ConfigError(what + ": negative or non-finite value");
    if (n > 0 && v[n] < v[n - 1]) throw ConfigError(what + ": cumulative series decreases at row " + std::to_string(n));
  }
}

void check_times(const std::vector<double>& t, const std::string& what) {
  if (t.empty()) throw ConfigError(what + ": no time rows");
  if (!(t[0] >= 0.0)) throw ConfigError(what + ": first time must be >= 0");
  for (std::size_t n = 1; n < t.size(); ++n)
    if (!(t[n] > t[n - 1])) throw ConfigError(what + ": times must be strictly increasing");
}

}  // namespace

void HistorySchedule::validate(std::size_t n_blocks) const {
  check_times(times, "history schedule");
  if (cum.size() != times.size()) throw ConfigError("history schedule: row count mismatch");
  for (const auto& row : cum)
    if (row.size() != n_blocks) throw ConfigError("history schedule: every time needs every block");
  if (!p_obs.empty() && p_obs.size() != times.size())
    throw ConfigError("history schedule: observed pressure row count mismatch");
  for (std::size_t b = 0; b < n_blocks; ++b) {
    std::vector<double> np, gp, wp, gi, wi;
    for (const auto& row : cum) {
      np.push_back(row[b].np);
      gp.push_back(row[b].gp);
      wp.push_back(row[b].wp);
      gi.push_back(row[b].ginj);
      wi.push_back(row[b].winj);
    }
    const std::string who = "history schedule block " + std::to_string(b);
    check_cumulative_series(np, who + " np");
    check_cumulative_series(gp, who + " gp");
    check_cumulative_series(wp, who + " wp");
    check_cumulative_series(gi, who + " ginj");
    check_cumulative_series(wi, who + " winj");
  }
}

HistorySchedule HistorySchedule::head(std::size_t count) const {
  HistorySchedule h;
  count = std::min(count, times.size());
  h.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(count));
  h.cum.assign(cum.begin(), cum.begin() + static_cast<std::ptrdiff_t>(count));
  if (!p_obs.empty()) h.p_obs.assign(p_obs.begin(), p_obs.begin() + static_cast<std::ptrdiff_t>(count));
  return h;
}

void ForecastSchedule::validate(std::size_t n_blocks) const {
  check_times(times, "forecast schedule");
  if (rows.size() != times.size()) throw ConfigError("forecast schedule: row count mismatch");
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (rows[n].size() != n_blocks) throw ConfigError("forecast schedule: every time needs every block");
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const auto& r = rows[n][b];
      const std::string who = "forecast schedule row " + std::to_string(n) + " block " + std::to_string(b);
      if (!(r.pwf >= 0.0)) throw ConfigError(who + ": pwf must be >= 0");
      if (r.n_producers < 0) throw ConfigError(who + ": nproducers must be >= 0");
      if (r.n_producers > 0 && !(r.qlmax > 0.0)) throw ConfigError(who + ": qlmax must be > 0 with producers");
      if (!(r.ginj >= 0.0 && r.winj >= 0.0)) throw ConfigError(who + ": negative injection");
      if (n > 0 && (r.ginj < rows[n - 1][b].ginj || r.winj < rows[n - 1][b].winj))
        throw ConfigError(who + ": cumulative injection decreases");
    }
  }
}

FreePhase free_phase_components(const Block& block, double p, double n_p, double g_p) {
  const auto& t = *block.pvt;
  const double rs = t.eval(Property::Rs, p), rv = t.eval(Property::Rv, p);
  const double d = 1.0 - rs * rv;
  if (!(d > 0.0)) throw SingularPvtError("1 - Rs*Rv <= 0 at p = " + std::to_string(p));
  const double gas_left = block.gas_in_place() - g_p;
  const double oil_left = block.oil_in_place() - n_p;
  return {(gas_left - oil_left * rs) / d, (oil_left - gas_left * rv) / d};
}

PhaseVolumes phase_volumes(const Block& block, double p, const Cumulatives& cum, double w_e,
                           const std::array<double, 3>& influx) {
  const auto& t = *block.pvt;
  const double bo = t.eval(Property::Bo, p), bg = t.eval(Property::Bg, p), bw = t.eval(Property::Bw, p);
  const double rs = t.eval(Property::Rs, p), rv = t.eval(Property::Rv, p);
  const auto fp = free_phase_components(block, p, cum.np, cum.gp);
  const double dp = block.p_init - p;
  PhaseVolumes v;
  v.vo = bo * (block.oil_in_place() - fp.g_fg * rv - cum.np) + influx[kOil];
  v.vg = bg * (block.gas_in_place() - fp.n_fo * rs - cum.gp) + cum.ginj * bg + influx[kGas];
  v.vw = w_e - bw * cum.wp + bw * cum.winj + block.pore_volume() * block.s_wi * (1.0 + block.c_w * dp) +
         influx[kWater];
  return v;
}

Saturations saturations(double vo, double vg, double vw) {
  Saturations s;
  if (vo < 0.0) { vo = 0.0; s.clamped = true; }
  if (vg < 0.0) { vg = 0.0; s.clamped = true; }
  if (vw < 0.0) { vw = 0.0; s.clamped = true; }
  const double total = vo + vg + vw;
  if (!(total > 0.0)) throw DegenerateBlockError("all phase volumes are zero");
  s.so = vo / total;
  s.sg = vg / total;
  s.sw = vw / total;
  return s;
}

}  // namespace matnet

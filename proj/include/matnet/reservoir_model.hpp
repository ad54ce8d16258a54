#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "matnet/aquifer.hpp"
#include "matnet/pvt.hpp"
#include "matnet/relperm.hpp"

namespace matnet {

/// Phase order used for fluxes and saturations throughout the library.
enum Phase : int { kOil = 0, kGas = 1, kWater = 2 };
inline constexpr int kPhaseCount = 3;

/// One compartment (tank).
struct Block {
  int id = 0;
  double n_foi = 0.0;   ///< oil component initially in the oil phase, STB
  double g_fgi = 0.0;   ///< gas component initially in the gas phase, scf
  double s_wi = 0.0;    ///< initial water saturation
  double c_f = 0.0;     ///< formation compressibility, 1/psi
  double c_w = 0.0;     ///< water compressibility, 1/psi
  double p_init = 0.0;  ///< psia
  double z = 0.0;       ///< datum depth, ft (positive down)
  std::shared_ptr<const PvtTable> pvt;
  std::shared_ptr<const RelPermCurves> relperm;
  std::optional<AquiferParams> aquifer;

  void validate() const;

  double b_oi() const { return pvt->eval(Property::Bo, p_init); }
  double b_gi() const { return pvt->eval(Property::Bg, p_init); }
  double r_si() const { return pvt->eval(Property::Rs, p_init); }
  double r_vi() const { return pvt->eval(Property::Rv, p_init); }
  /// Initial pore volume (N_foi B_oi + G_fgi B_gi) / (1 - S_wi), RB.
  double pore_volume() const;
  /// Initial hydrocarbon volume N_foi B_oi + G_fgi B_gi, RB.
  double hydrocarbon_volume() const;
  /// Total initial oil component N = N_foi + G_fgi R_vi, STB.
  double oil_in_place() const { return n_foi + g_fgi * r_vi(); }
  /// Total initial gas component G = G_fgi + N_foi R_si, scf.
  double gas_in_place() const { return g_fgi + n_foi * r_si(); }
};

struct Connection {
  int i = 0;
  int j = 0;
  double t = 0.0;  ///< transmissibility, mD*ft
};

/// Blocks plus symmetric inter-block transmissibilities.
class ReservoirNetwork {
public:
  ReservoirNetwork() = default;
  ReservoirNetwork(std::vector<Block> blocks, std::vector<Connection> connections, double t_max);

  std::size_t size() const { return blocks_.size(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_.at(i); }
  Block& mutable_block(std::size_t i) { return blocks_.at(i); }

  /// Connections with i < j, in input order after normalization.
  const std::vector<Connection>& connections() const { return connections_; }
  double t_max() const { return t_max_; }
  void set_t_max(double t) { t_max_ = t; }
  void set_connection_t(std::size_t c, double t) { connections_.at(c).t = t; }

  /// T_ij (zero when not connected or i == j).
  double transmissibility(std::size_t i, std::size_t j) const;
  /// Connection indices touching block i.
  const std::vector<std::size_t>& incident(std::size_t i) const { return incident_.at(i); }

  void validate() const;

private:
  std::vector<Block> blocks_;
  std::vector<Connection> connections_;
  std::vector<std::vector<std::size_t>> incident_;
  double t_max_ = 0.0;
};

/// Cumulative block volumes at one schedule time.
struct Cumulatives {
  double np = 0.0;    ///< STB
  double gp = 0.0;    ///< scf
  double wp = 0.0;    ///< STB
  double ginj = 0.0;  ///< scf
  double winj = 0.0;  ///< STB
  bool operator==(const Cumulatives&) const = default;
};

/// Observed history; cum[n][b] is block b at times[n].
struct HistorySchedule {
  std::vector<double> times;
  std::vector<std::vector<Cumulatives>> cum;
  /// Optional observed average pressure; NaN where absent.
  std::vector<std::vector<double>> p_obs;

  std::size_t steps() const { return times.size(); }
  void validate(std::size_t n_blocks) const;
  /// First `count` time rows.
  HistorySchedule head(std::size_t count) const;
};

struct ForecastControl {
  double pwf = 0.0;      ///< flowing bottomhole pressure, psia
  double qlmax = 0.0;    ///< absolute open flow per producer, STB/day
  int n_producers = 0;
  double ginj = 0.0;     ///< cumulative, scf
  double winj = 0.0;     ///< cumulative, STB
};

struct ForecastSchedule {
  std::vector<double> times;
  std::vector<std::vector<ForecastControl>> rows;

  std::size_t steps() const { return times.size(); }
  void validate(std::size_t n_blocks) const;
};

struct FreePhase {
  double g_fg = 0.0;  ///< gas component in the gas phase, scf
  double n_fo = 0.0;  ///< oil component in the oil phase, STB
};

struct PhaseVolumes {
  double vo = 0.0, vg = 0.0, vw = 0.0;  ///< RB
};

struct Saturations {
  double so = 0.0, sg = 0.0, sw = 0.0;
  bool clamped = false;  ///< a negative phase volume was clamped to zero

  double of(int phase) const { return phase == kOil ? so : phase == kGas ? sg : sw; }
};

/// Solves the two remaining-in-place balances for G_fg and N_fo at pressure p.
FreePhase free_phase_components(const Block& block, double p, double n_p, double g_p);

/// Current oil/gas/water volumes at reservoir conditions. `influx` is the net
/// cumulative phase volume received from connected blocks (RB), zero by default.
PhaseVolumes phase_volumes(const Block& block, double p, const Cumulatives& cum, double w_e,
                           const std::array<double, 3>& influx = {0.0, 0.0, 0.0});

Saturations saturations(double vo, double vg, double vw);
inline Saturations saturations(const PhaseVolumes& v) { return saturations(v.vo, v.vg, v.vw); }

}  // namespace matnet

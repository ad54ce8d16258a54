#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "matnet/matbal_history.hpp"

namespace matnet {

/// Unknown ordering: block-contiguous quadruples (p, Np, Gp, Wp).
inline constexpr int kUnknownsPerBlock = 4;
enum ForecastVar : int { kVarP = 0, kVarNp = 1, kVarGp = 2, kVarWp = 3 };

inline Eigen::Index unknown_index(std::size_t block, int var) {
  return static_cast<Eigen::Index>(block) * kUnknownsPerBlock + var;
}

struct ForecastConfig {
  SolverConfig newton;
  double kro_floor = 1e-6;   ///< lower bound on k_ro in the WOR/GOR ratios
  int max_halvings = 6;      ///< smallest sub-step is dt / 2^max_halvings

  void validate() const;
};

/// 1 - 0.2 x - 0.8 x^2 with x = pwf / p.
double vogel_factor(double pwf, double p);
double vogel_factor_dp(double pwf, double p);

/// Saturations of a block and their gradients with respect to (p, Np, Gp, Wp).
struct SaturationSensitivity {
  Saturations s;
  std::array<std::array<double, 4>, 3> ds{};  ///< ds[phase][var]
};

SaturationSensitivity saturation_sensitivity(const Block& block, double p, const Cumulatives& cum,
                                             double w_e, double dwe_dp,
                                             const std::array<double, 3>& influx);

/// Residual/Jacobian of one implicit forecast step.
class ForecastStepSystem {
public:
  ForecastStepSystem(const ReservoirNetwork& net, const HistoryState& state,
                     std::vector<ForecastControl> controls, double dt, const ForecastConfig& cfg);

  Eigen::VectorXd initial_guess() const;

  /// Material balance (RB).
  double r1(std::size_t b, const Eigen::VectorXd& x) const;
  /// Vogel inflow closure (STB).
  double r2(std::size_t b, const Eigen::VectorXd& x) const;
  /// Water/oil ratio closure (STB).
  double r3(std::size_t b, const Eigen::VectorXd& x) const;
  /// Gas/oil ratio closure (scf).
  double r4(std::size_t b, const Eigen::VectorXd& x) const;

  double wor(std::size_t b, const Eigen::VectorXd& x) const;
  double gor(std::size_t b, const Eigen::VectorXd& x) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  std::vector<std::array<double, 3>> step_flux(const Eigen::VectorXd& x) const;

  /// Cumulatives of block b at the iterate.
  Cumulatives cumulatives(std::size_t b, const Eigen::VectorXd& x) const;
  /// Producers actually flowing this step (zero when the block starts at or below pwf).
  int active_producers(std::size_t b) const { return producers_[b]; }
  /// Scale used for the cumulative unknowns of block b (OOIP or gas in place).
  double unknown_scale(std::size_t b, int var) const;
  /// Scale of residual row `var` of block b for convergence tests.
  double residual_scale(std::size_t b, int var) const;

  std::size_t size() const { return net_.size() * kUnknownsPerBlock; }

private:
  struct Ratios {
    double wor, gor;
    std::array<double, 4> dwor, dgor;
  };
  Ratios ratios(std::size_t b, const Eigen::VectorXd& x) const;

  const ReservoirNetwork& net_;
  const HistoryState& state_;
  std::vector<ForecastControl> controls_;
  double dt_;
  const ForecastConfig& cfg_;
  std::vector<double> ledger_;
  std::vector<int> producers_;
};

/// Structural nonzeros of the forecast Jacobian: dense 4x4 diagonal blocks
/// plus material-balance rows coupled to connected blocks' pressure columns.
std::vector<std::pair<int, int>> forecast_jacobian_pattern(const ReservoirNetwork& net);

struct ForecastRecord {
  double time = 0.0;
  std::vector<double> p, np, gp, wp;
  int substeps = 1;
  int iterations = 0;
  bool below_pwf = false;  ///< some block iterate fell to or below its pwf
};

struct ForecastResult {
  std::vector<ForecastRecord> records;
  HistoryState final_state;
};

/// Marches the forecast schedule from `initial`. Each schedule interval is
/// taken as one step, halved on nonconvergence or decreasing cumulatives.
ForecastResult run_forecast(const ReservoirNetwork& net, const ForecastSchedule& schedule,
                            const HistoryState& initial, const ForecastConfig& cfg);

}  // namespace matnet

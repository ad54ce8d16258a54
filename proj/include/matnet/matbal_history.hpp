#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "matnet/reservoir_model.hpp"

namespace matnet {

struct SolverConfig {
  double newton_tol_residual = 1e-3;  ///< RB, infinity norm
  double newton_tol_update = 1e-6;    ///< psia, infinity norm
  int max_newton_iters = 50;
  double damping = 1.0;               ///< in (0, 1]
  double max_dp = 500.0;              ///< per-iteration pressure change cap, psi
  bool gravity_enabled = true;
  /// Converts T[mD*ft] * dp[psi] / mu[cP] * dt[day] into RB.
  double flux_unit_constant = 6.3266e-3;
  /// Hydrostatic gradient per unit density: psi per (lbm/ft3 * ft).
  double gravity_psi_per_lbm_ft2 = 1.0 / 144.0;

  void validate() const;
};

/// Local (single-tank) material-balance residual, RB.
double residual_local(const Block& block, double p, const Cumulatives& cum, double w_e);

/// d residual_local / dp, with dwe_dp the aquifer sensitivity for the step.
double residual_local_dp(const Block& block, double p, const Cumulatives& cum, double dwe_dp);

/// Volume of each phase moving from block j into block i over one step, and
/// its derivatives with respect to both block pressures.
struct ConnectionFlux {
  std::array<double, 3> flux{};
  std::array<double, 3> d_dpi{};
  std::array<double, 3> d_dpj{};
};

/// Backward-Euler step flux through one connection. Rel-perms come from the
/// upstream block's lagged saturation; mobility and density use the mean of
/// the two blocks' values at the iterate pressures.
ConnectionFlux connection_flux(const Block& bi, const Block& bj, double t_ij, double p_i, double p_j,
                               const Saturations& s_i_lag, const Saturations& s_j_lag, double dt,
                               const SolverConfig& cfg);

/// Non-local residual of block i from complete histories: pressures[m] holds
/// p^(m+1), lagged_sats[m] holds S^m, dts[m] the length of step m+1.
double residual_nonlocal(const ReservoirNetwork& net, std::size_t i,
                         std::span<const std::vector<double>> pressures,
                         std::span<const std::vector<Saturations>> lagged_sats,
                         std::span<const double> dts, const SolverConfig& cfg);

/// Converged state after some number of history (or forecast) steps.
struct HistoryState {
  std::size_t step = 0;
  double time = 0.0;
  std::vector<double> p;
  std::vector<Saturations> sat;
  std::vector<Cumulatives> cum;
  std::vector<AquiferTracker> aquifers;
  /// Cumulative flux into connection.i from connection.j, per phase (RB).
  std::vector<std::array<double, 3>> conn_flux;

  static HistoryState initial(const ReservoirNetwork& net);

  /// Net cumulative phase volume received by block b from all neighbours.
  std::array<double, 3> net_influx(const ReservoirNetwork& net, std::size_t b) const;
  double w_e(std::size_t b) const { return aquifers[b].current(); }

  /// Adds one step's connection fluxes, commits aquifer pressures and
  /// recomputes saturations.
  void advance(const ReservoirNetwork& net, double dt, std::vector<double> p_new,
               std::vector<Cumulatives> cum_new, const std::vector<std::array<double, 3>>& step_flux);
};

/// Residual/Jacobian of one implicit pressure step for all blocks.
class HistoryStepSystem {
public:
  HistoryStepSystem(const ReservoirNetwork& net, const HistoryState& state,
                    std::vector<Cumulatives> cum_next, double dt, const SolverConfig& cfg);

  Eigen::VectorXd residual(const Eigen::VectorXd& p) const;
  /// Analytic Jacobian; entries outside the adjacency pattern are exactly zero.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const;
  /// Per-connection phase fluxes for the step at pressures p.
  std::vector<std::array<double, 3>> step_flux(const Eigen::VectorXd& p) const;

  std::size_t size() const { return net_.size(); }

private:
  const ReservoirNetwork& net_;
  const HistoryState& state_;
  std::vector<Cumulatives> cum_;
  double dt_;
  const SolverConfig& cfg_;
  std::vector<double> ledger_;
};

struct StepResult {
  std::vector<double> p;
  int iterations = 0;
  std::vector<double> residual_norms;  ///< ||R||_inf at each iterate, first to last
  Eigen::VectorXd final_residual;
  std::vector<std::array<double, 3>> step_flux;
};

StepResult solve_step(const ReservoirNetwork& net, const HistoryState& state,
                      const std::vector<Cumulatives>& cum_next, double dt, const SolverConfig& cfg);

struct HistoryRecord {
  double time = 0.0;
  std::vector<double> p;
  std::vector<Saturations> sat;
  std::vector<double> we;
  std::vector<std::array<double, 3>> step_flux;  ///< per connection, into i from j
  std::vector<double> residual;                  ///< total residual at the accepted iterate
  int iterations = 0;
  std::vector<double> residual_norms;
};

struct HistoryResult {
  std::vector<HistoryRecord> records;  ///< records[0] is the initial state at t = 0
  HistoryState final_state;
};

/// Rejects networks in which some pressure cannot be determined (every
/// property constant, no compressibility, no aquifer and no connection).
void check_solvable(const ReservoirNetwork& net);

HistoryResult run_history(const ReservoirNetwork& net, const HistorySchedule& schedule,
                          const SolverConfig& cfg);

/// Solves J x = b with a full-pivoting LU; throws LinearSolveError when singular.
Eigen::VectorXd dense_solve(const Eigen::MatrixXd& J, const Eigen::VectorXd& b);

}  // namespace matnet

#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "matnet/history_match.hpp"
#include "matnet/matbal_forecast.hpp"

namespace matnet {

struct SyntheticSpec {
  int n_blocks = 5;
  /// Empty selects the default topology: the five-block layout for
  /// n_blocks == 5, otherwise a chain with one skip connection.
  std::vector<std::pair<int, int>> connections;
  int n_steps = 60;
  double dt = 30.0;          ///< days
  double noise_std = 1.0;    ///< psi, gauge-level
  double prior_spread = 0.5; ///< bounds are truth * (1 -/+ spread)
  std::uint64_t seed = 0;    ///< drives the observation noise only

  void validate() const;
};

std::vector<std::pair<int, int>> default_connections(int n_blocks);

/// Self-consistent twin: production is generated by the forecast model under
/// bottomhole-pressure controls, the resulting cumulatives (rounded to file
/// precision) form the history schedule, and observations are the history
/// solution plus Gaussian noise.
struct SyntheticCase {
  ReservoirNetwork network;
  ForecastSchedule controls;  ///< extends past the history
  HistorySchedule history;   ///< cumulatives plus noisy observed pressures
  HistoryResult truth_run;   ///< history solution on `history`
  ObservationSet observations;
  ParameterSpace space;
  Eigen::VectorXd truth;     ///< physical values, aligned with `space`

  HistoryMatchProblem problem(const SolverConfig& solver = {}) const;
};

SyntheticCase make_synthetic(const SyntheticSpec& spec);

/// Writes network, tables, schedules, observations, truth and ready-to-run
/// CLI configs into `dir`.
void write_synthetic(const SyntheticCase& c, const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace matnet

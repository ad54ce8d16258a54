#pragma once

#include <Eigen/Dense>
#include <vector>

#include "matnet/clustering/temporal.hpp"
#include "matnet/history_match.hpp"

namespace matnet::kernels {

/// Each kernel has a serial reference and an OpenMP version that must agree
/// bitwise; every output slot is written by exactly one iteration.

Eigen::MatrixXd pairwise_distances_serial(const std::vector<clustering::WellSeries>& wells,
                                          const clustering::DtwOptions& opt);
Eigen::MatrixXd pairwise_distances_parallel(const std::vector<clustering::WellSeries>& wells,
                                            const clustering::DtwOptions& opt);

std::vector<ForwardResult> forward_ensemble_serial(const HistoryMatchProblem& problem,
                                                   const Eigen::MatrixXd& internal);
std::vector<ForwardResult> forward_ensemble_parallel(const HistoryMatchProblem& problem,
                                                     const Eigen::MatrixXd& internal);

}  // namespace matnet::kernels

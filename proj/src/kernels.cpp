#include "matnet/kernels.hpp"

namespace matnet::kernels {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> upper_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  return pairs;
}

}  // namespace

Eigen::MatrixXd pairwise_distances_serial(const std::vector<clustering::WellSeries>& wells,
                                          const clustering::DtwOptions& opt) {
  const auto n = static_cast<Eigen::Index>(wells.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (auto [a, b] : upper_pairs(wells.size())) {
    const double v = clustering::series_distance(wells[a], wells[b], opt);
    d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    d(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
  }
  return d;
}

Eigen::MatrixXd pairwise_distances_parallel(const std::vector<clustering::WellSeries>& wells,
                                            const clustering::DtwOptions& opt) {
  const auto n = static_cast<Eigen::Index>(wells.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const auto pairs = upper_pairs(wells.size());
  const auto np = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long q = 0; q < np; ++q) {
    const auto [a, b] = pairs[static_cast<std::size_t>(q)];
    const double v = clustering::series_distance(wells[a], wells[b], opt);
    d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    d(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
  }
  return d;
}

std::vector<ForwardResult> forward_ensemble_serial(const HistoryMatchProblem& problem,
                                                   const Eigen::MatrixXd& internal) {
  std::vector<ForwardResult> out(static_cast<std::size_t>(internal.cols()));
  for (Eigen::Index j = 0; j < internal.cols(); ++j)
    out[static_cast<std::size_t>(j)] = forward(problem, internal.col(j));
  return out;
}

std::vector<ForwardResult> forward_ensemble_parallel(const HistoryMatchProblem& problem,
                                                     const Eigen::MatrixXd& internal) {
  std::vector<ForwardResult> out(static_cast<std::size_t>(internal.cols()));
  const long n = static_cast<long>(internal.cols());
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = forward(problem, internal.col(j));
  return out;
}

}  // namespace matnet::kernels

#pragma once

#include <utility>
#include <vector>

namespace matnet::clustering {

enum class LocalMetric { SquaredEuclidean, Manhattan };

/// Step weights. Horizontal extends x (i-1 -> i), vertical extends y
/// (j-1 -> j), diagonal extends both.
struct DtwWeights {
  double horizontal = 1.0;
  double vertical = 1.0;
  double diagonal = 1.0;
};

struct DtwOptions {
  DtwWeights weights;
  LocalMetric metric = LocalMetric::SquaredEuclidean;
};

struct DtwResult {
  double cost = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> path;  ///< 0-based (i, j), from (0,0) to (N-1,M-1)
};

double local_cost(double a, double b, LocalMetric metric);

/// Full dynamic program with backtracking. On ties the backtrack prefers the
/// diagonal predecessor, then the vertical one.
DtwResult dtw(const std::vector<double>& x, const std::vector<double>& y, const DtwOptions& opt = {});

/// Cost only, O(min(N, M)) memory. Bitwise equal to dtw(x, y).cost.
double dtw_cost(const std::vector<double>& x, const std::vector<double>& y, const DtwOptions& opt = {});

/// dtw_cost / (N + M).
double dtw_normalized(const std::vector<double>& x, const std::vector<double>& y, const DtwOptions& opt = {});

/// Weighted cost of an explicit warping path, accumulated in path order.
double path_cost(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<std::pair<std::size_t, std::size_t>>& path, const DtwOptions& opt = {});

}  // namespace matnet::clustering

#pragma once

#include <functional>
#include <vector>

namespace matnet::clustering {

struct ElbowResult {
  int k = 0;
  bool degenerate = false;        ///< no point lies off the chord
  std::vector<int> ks;
  std::vector<double> costs;
  std::vector<double> distances;  ///< normalized perpendicular distance to the chord
};

/// Knee of a cost curve sampled at consecutive k = k_min .. k_min + n - 1.
/// Both axes are scaled to [0, 1] before measuring distance to the chord;
/// ties resolve to the smaller k.
ElbowResult elbow_select(int k_min, const std::vector<double>& costs);

/// Evaluates `cost_of_k` for every k in [k_min, k_max] (in parallel when
/// OpenMP is available) and selects the knee.
ElbowResult elbow_select(int k_min, int k_max, const std::function<double(int)>& cost_of_k, bool parallel = true);

}  // namespace matnet::clustering

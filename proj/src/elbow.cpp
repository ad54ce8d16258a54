#include "matnet/clustering/elbow.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "matnet/error.hpp"

namespace matnet::clustering {

namespace {
constexpr double kTieTolerance = 1e-12;
}

ElbowResult elbow_select(int k_min, const std::vector<double>& costs) {
  if (costs.empty()) throw ConfigError("elbow: empty cost curve");
  for (double c : costs)
    if (!std::isfinite(c)) throw ConfigError("elbow: non-finite cost");
  ElbowResult r;
  r.costs = costs;
  const std::size_t n = costs.size();
  for (std::size_t a = 0; a < n; ++a) r.ks.push_back(k_min + static_cast<int>(a));
  r.distances.assign(n, 0.0);
  r.k = k_min;
  if (n < 3) {
    r.degenerate = true;
    return r;
  }
  const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
  const double cspan = *hi - *lo;
  if (!(cspan > 0.0)) {
    r.degenerate = true;
    return r;
  }
  auto xn = [&](std::size_t a) { return static_cast<double>(a) / static_cast<double>(n - 1); };
  auto yn = [&](std::size_t a) { return (costs[a] - *lo) / cspan; };
  const double x0 = xn(0), y0 = yn(0), x1 = xn(n - 1), y1 = yn(n - 1);
  const double len = std::hypot(x1 - x0, y1 - y0);
  double best = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const double d = std::abs((y1 - y0) * xn(a) - (x1 - x0) * yn(a) + x1 * y0 - y1 * x0) / len;
    r.distances[a] = d;
    if (d > best + kTieTolerance) {
      best = d;
      r.k = r.ks[a];
    }
  }
  r.degenerate = !(best > kTieTolerance);
  return r;
}

ElbowResult elbow_select(int k_min, int k_max, const std::function<double(int)>& cost_of_k, bool parallel) {
  if (k_min < 1 || k_max < k_min) throw ConfigError("elbow: invalid k range");
  const int n = k_max - k_min + 1;
  std::vector<double> costs(static_cast<std::size_t>(n));
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int a = 0; a < n; ++a) {
    try {
      costs[static_cast<std::size_t>(a)] = cost_of_k(k_min + a);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return elbow_select(k_min, costs);
}

}  // namespace matnet::clustering

#include "matnet/table.hpp"

#include <algorithm>
#include <cmath>

#include "matnet/error.hpp"

namespace matnet {

LinearTable::LinearTable(std::vector<double> x, std::vector<double> y, const std::string& name)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() < 2) throw ConfigError(name + ": at least two nodes required");
  if (x_.size() != y_.size()) throw ConfigError(name + ": abscissa/ordinate length mismatch");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
      throw ConfigError(name + ": non-finite value at node " + std::to_string(i));
    if (i > 0 && !(x_[i] > x_[i - 1]))
      throw ConfigError(name + ": nodes must be strictly increasing (node " + std::to_string(i) + ")");
  }
}

double LinearTable::value(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  std::size_t lo = hi - 1;
  double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
  return y_[lo] + t * (y_[hi] - y_[lo]);
}

double LinearTable::slope(double x) const {
  const std::size_t n = x_.size();
  auto seg = [&](std::size_t lo) { return (y_[lo + 1] - y_[lo]) / (x_[lo + 1] - x_[lo]); };
  if (x < x_.front() || x > x_.back()) return 0.0;
  if (x == x_.front()) return seg(0);
  if (x == x_.back()) return seg(n - 2);
  auto it = std::lower_bound(x_.begin(), x_.end(), x);
  std::size_t k = static_cast<std::size_t>(it - x_.begin());
  if (x_[k] == x) return 0.5 * (seg(k - 1) + seg(k));
  return seg(k - 1);
}

}  // namespace matnet

#pragma once

#include <span>
#include <string>
#include <vector>

namespace matnet {

/// Piecewise-linear function on strictly increasing abscissae.
///
/// Outside [x.front(), x.back()] the value is clamped to the end value and the
/// slope is zero. At an interior node the slope is the mean of the two adjacent
/// segment slopes; at an end node it is the slope of the single inner segment.
class LinearTable {
public:
  LinearTable() = default;
  LinearTable(std::vector<double> x, std::vector<double> y, const std::string& name = "table");

  double value(double x) const;
  double slope(double x) const;

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  bool empty() const { return x_.empty(); }

private:
  std::vector<double> x_;
  std::vector<double> y_;
};

}  // namespace matnet

#include "matnet/clustering/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matnet/error.hpp"

namespace matnet::clustering {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonempty(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw ConfigError("dtw: sequences must be nonempty");
}
}  // namespace

double local_cost(double a, double b, LocalMetric metric) {
  const double d = a - b;
  return metric == LocalMetric::SquaredEuclidean ? d * d : std::abs(d);
}

DtwResult dtw(const std::vector<double>& x, const std::vector<double>& y, const DtwOptions& opt) {
  require_nonempty(x, y);
  const std::size_t n = x.size(), m = y.size(), w = m + 1;
  std::vector<double> t((n + 1) * w, kInf);
  t[0] = 0.0;
  const auto& wt = opt.weights;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const double c = local_cost(x[i - 1], y[j - 1], opt.metric);
      const double h = t[(i - 1) * w + j] + wt.horizontal * c;
      const double v = t[i * w + j - 1] + wt.vertical * c;
      const double d = t[(i - 1) * w + j - 1] + wt.diagonal * c;
      t[i * w + j] = std::min({h, v, d});
    }

  DtwResult r;
  r.cost = t[n * w + m];
  std::size_t i = n, j = m;
  while (true) {
    r.path.emplace_back(i - 1, j - 1);
    if (i == 1 && j == 1) break;
    const double c = local_cost(x[i - 1], y[j - 1], opt.metric);
    const double here = t[i * w + j];
    if (i > 1 && j > 1 && t[(i - 1) * w + j - 1] + wt.diagonal * c == here) {
      --i;
      --j;
    } else if (j > 1 && t[i * w + j - 1] + wt.vertical * c == here) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

double dtw_cost(const std::vector<double>& x, const std::vector<double>& y, const DtwOptions& opt) {
  require_nonempty(x, y);
  const std::size_t n = x.size(), m = y.size();
  const auto& wt = opt.weights;
  std::vector<double> prev(m + 1, kInf), cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = kInf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double c = local_cost(x[i - 1], y[j - 1], opt.metric);
      const double h = prev[j] + wt.horizontal * c;
      const double v = cur[j - 1] + wt.vertical * c;
      const double d = prev[j - 1] + wt.diagonal * c;
      cur[j] = std::min({h, v, d});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double dtw_normalized(const std::vector<double>& x, const std::vector<double>& y, const DtwOptions& opt) {
  return dtw_cost(x, y, opt) / static_cast<double>(x.size() + y.size());
}

double path_cost(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<std::pair<std::size_t, std::size_t>>& path, const DtwOptions& opt) {
  if (path.empty()) throw ConfigError("dtw: empty path");
  double s = 0.0;
  std::size_t pi = 0, pj = 0;
  bool first = true;
  for (auto [i, j] : path) {
    const double c = local_cost(x.at(i), y.at(j), opt.metric);
    double wgt = opt.weights.diagonal;
    if (!first) {
      if (i == pi + 1 && j == pj) wgt = opt.weights.horizontal;
      else if (i == pi && j == pj + 1) wgt = opt.weights.vertical;
      else if (i != pi + 1 || j != pj + 1) throw ConfigError("dtw: path violates the step constraint");
    }
    s += wgt * c;
    pi = i;
    pj = j;
    first = false;
  }
  return s;
}

}  // namespace matnet::clustering

#include "matnet/clustering/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "matnet/clustering/kprototypes.hpp"
#include "matnet/error.hpp"
#include "matnet/rng.hpp"

namespace matnet::clustering {

TimeSeries resample(const TimeSeries& s, const std::vector<double>& grid) {
  if (s.times.empty() || s.times.size() != s.values.size()) throw ConfigError("resample: malformed series");
  TimeSeries out;
  out.times = grid;
  out.values.reserve(grid.size());
  for (double t : grid) {
    if (t <= s.times.front()) {
      out.values.push_back(s.values.front());
      continue;
    }
    if (t >= s.times.back()) {
      out.values.push_back(s.values.back());
      continue;
    }
    const auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - s.times.begin());
    const double w = (t - s.times[k - 1]) / (s.times[k] - s.times[k - 1]);
    out.values.push_back(s.values[k - 1] + w * (s.values[k] - s.values[k - 1]));
  }
  return out;
}

void normalize_channels(std::vector<WellSeries>& wells) {
  if (wells.empty()) return;
  const std::size_t nc = wells.front().channels.size();
  for (const auto& w : wells)
    if (w.channels.size() != nc) throw ConfigError("series: well " + w.well + " has a different channel count");
  for (std::size_t c = 0; c < nc; ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& w : wells)
      for (double v : w.channels[c].values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    const double span = hi - lo;
    for (auto& w : wells)
      for (double& v : w.channels[c].values) v = span > 0.0 ? (v - lo) / span : 0.0;
  }
}

double series_distance(const WellSeries& a, const WellSeries& b, const DtwOptions& opt) {
  if (a.channels.size() != b.channels.size()) throw ConfigError("series: channel count mismatch");
  double d = 0.0;
  for (std::size_t c = 0; c < a.channels.size(); ++c)
    d += dtw_normalized(a.channels[c].values, b.channels[c].values, opt);
  return d;
}

namespace {

void check_matrix(const Eigen::MatrixXd& dist) {
  if (dist.rows() != dist.cols() || dist.rows() == 0) throw ConfigError("temporal: distance matrix must be square");
}

double assign(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& medoids, std::vector<int>& labels) {
  const std::size_t n = static_cast<std::size_t>(dist.rows());
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double bd = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[0]));
    for (std::size_t l = 1; l < medoids.size(); ++l) {
      const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[l]));
      if (d < bd) {
        bd = d;
        best = static_cast<int>(l);
      }
    }
    for (std::size_t l = 0; l < medoids.size(); ++l)
      if (medoids[l] == i) {
        best = static_cast<int>(l);
        bd = 0.0;
      }
    labels[i] = best;
    cost += bd;
  }
  return cost;
}

double medoid_cost(const Eigen::MatrixXd& dist, const std::vector<int>& labels, const std::vector<std::size_t>& medoids) {
  double c = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    c += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[static_cast<std::size_t>(labels[i])]));
  return c;
}

}  // namespace

TemporalModel temporal_kmeans(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& initial_medoids,
                              int max_iter) {
  check_matrix(dist);
  const std::size_t n = static_cast<std::size_t>(dist.rows());
  const std::size_t k = initial_medoids.size();
  if (k == 0 || k > n) throw ConfigError("temporal k-means: k must lie in [1, number of series]");
  for (std::size_t a = 0; a < k; ++a) {
    if (initial_medoids[a] >= n) throw ConfigError("temporal k-means: medoid index out of range");
    for (std::size_t b = 0; b < a; ++b)
      if (initial_medoids[a] == initial_medoids[b]) throw ConfigError("temporal k-means: duplicate medoid");
  }

  TemporalModel m;
  m.k = static_cast<int>(k);
  m.medoids = initial_medoids;
  m.labels.assign(n, 0);
  m.cost_trace.push_back(assign(dist, m.medoids, m.labels));
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t l = 0; l < k; ++l) {
      std::size_t best = m.medoids[l];
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n; ++c) {
        if (m.labels[c] != static_cast<int>(l)) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (m.labels[i] == static_cast<int>(l)) s += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        if (s < bd) {
          bd = s;
          best = c;
        }
      }
      if (best != m.medoids[l]) {
        m.medoids[l] = best;
        changed = true;
      }
    }
    ++m.iterations;
    const auto before = m.labels;
    m.cost_trace.push_back(assign(dist, m.medoids, m.labels));
    if (!changed && before == m.labels) break;
  }
  m.cost = medoid_cost(dist, m.labels, m.medoids);
  return m;
}

TemporalModel temporal_kmeans(const Eigen::MatrixXd& dist, int k, std::uint64_t seed, int max_iter) {
  check_matrix(dist);
  const std::size_t n = static_cast<std::size_t>(dist.rows());
  if (k < 1 || static_cast<std::size_t>(k) > n) throw ConfigError("temporal k-means: k must lie in [1, number of series]");
  Rng rng(seed);
  std::vector<std::size_t> med{rng.index(n)};
  std::vector<double> dmin(n, std::numeric_limits<double>::infinity());
  while (med.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(med.back()));
      dmin[i] = std::min(dmin[i], d * d);
      total += dmin[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (dmin[i] <= 0.0) continue;
        pick = i;
        u -= dmin[i];
        if (u < 0.0) break;
      }
    }
    if (pick == n || std::find(med.begin(), med.end(), pick) != med.end())
      for (std::size_t i = 0; i < n; ++i)
        if (std::find(med.begin(), med.end(), i) == med.end()) {
          pick = i;
          break;
        }
    med.push_back(pick);
  }
  return temporal_kmeans(dist, med, max_iter);
}

double internal_variation(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& members) {
  if (members.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      s += dist(static_cast<Eigen::Index>(members[a]), static_cast<Eigen::Index>(members[b]));
  return s / (0.5 * static_cast<double>(members.size() * (members.size() - 1)));
}

namespace {

/// Splits `members` into leaves (each a list of global indices), depth-first.
void split_recursive(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& members, double threshold,
                     int depth, std::vector<std::vector<std::size_t>>& leaves, std::vector<std::string>& log) {
  if (depth <= 0 || members.size() < 2 || !(internal_variation(dist, members) > threshold)) {
    leaves.push_back(members);
    return;
  }
  const auto ns = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd sub(ns, ns);
  for (Eigen::Index a = 0; a < ns; ++a)
    for (Eigen::Index b = 0; b < ns; ++b)
      sub(a, b) = dist(static_cast<Eigen::Index>(members[static_cast<std::size_t>(a)]),
                       static_cast<Eigen::Index>(members[static_cast<std::size_t>(b)]));
  Eigen::Index fa = 0, fb = 1;
  for (Eigen::Index a = 0; a < ns; ++a)
    for (Eigen::Index b = a + 1; b < ns; ++b)
      if (sub(a, b) > sub(fa, fb)) {
        fa = a;
        fb = b;
      }
  const auto m = temporal_kmeans(sub, {static_cast<std::size_t>(fa), static_cast<std::size_t>(fb)});
  std::vector<std::size_t> left, right;
  for (std::size_t a = 0; a < members.size(); ++a) (m.labels[a] == 0 ? left : right).push_back(members[a]);
  if (left.empty() || right.empty()) {
    leaves.push_back(members);
    return;
  }
  log.push_back("split cluster of " + std::to_string(members.size()) + " into " + std::to_string(left.size()) +
                " + " + std::to_string(right.size()));
  split_recursive(dist, left, threshold, depth - 1, leaves, log);
  split_recursive(dist, right, threshold, depth - 1, leaves, log);
}

}  // namespace

TemporalModel adaptive_split(const TemporalModel& model, const Eigen::MatrixXd& dist, double threshold,
                             int depth_cap) {
  check_matrix(dist);
  if (!(threshold >= 0.0)) throw ConfigError("adaptive split: threshold must be non-negative");
  TemporalModel out = model;
  int next = model.k;
  bool any = false;
  for (int l = 0; l < model.k; ++l) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < model.labels.size(); ++i)
      if (model.labels[i] == l) members.push_back(i);
    std::vector<std::vector<std::size_t>> leaves;
    split_recursive(dist, members, threshold, depth_cap, leaves, out.log);
    if (leaves.size() == 1) continue;
    any = true;
    for (std::size_t q = 0; q < leaves.size(); ++q) {
      const int lab = q == 0 ? l : next++;
      for (std::size_t i : leaves[q]) out.labels[i] = lab;
    }
  }
  if (!any) return out;
  out.k = next;
  out.medoids.assign(static_cast<std::size_t>(next), 0);
  for (int l = 0; l < next; ++l) {
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.labels.size(); ++c) {
      if (out.labels[c] != l) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < out.labels.size(); ++i)
        if (out.labels[i] == l) s += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      if (s < bd) {
        bd = s;
        out.medoids[static_cast<std::size_t>(l)] = c;
      }
    }
  }
  out.cost = medoid_cost(dist, out.labels, out.medoids);
  out.cost_trace.push_back(out.cost);
  return out;
}

std::vector<int> fuse_labels(const std::vector<int>& spatial, const std::vector<int>& temporal,
                             const WellFeatureMatrix& f, double gamma, std::size_t min_size) {
  const std::size_t n = spatial.size();
  if (temporal.size() != n || f.size() != n) throw ConfigError("fuse: label vectors must cover the same wells");
  std::map<std::pair<int, int>, int> ids;
  std::vector<int> lab(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = ids.try_emplace({spatial[i], temporal[i]}, static_cast<int>(ids.size()));
    (void)fresh;
    lab[i] = it->second;
  }

  auto sizes = [&] {
    std::map<int, std::size_t> s;
    for (int l : lab) ++s[l];
    return s;
  };
  while (true) {
    auto sz = sizes();
    if (sz.size() < 2) break;
    int small = -1;
    for (auto [l, s] : sz)
      if (s < min_size && (small < 0 || s < sz[small])) small = l;
    if (small < 0) break;

    std::vector<int> labels_vec(lab);
    int kmax = sz.rbegin()->first + 1;
    std::vector<Prototype> fallback(static_cast<std::size_t>(kmax),
                                    Prototype{std::vector<double>(f.numeric_dims(), 0.0),
                                              std::vector<int>(f.categorical_dims(), 0)});
    const auto protos = optimal_prototypes(f, labels_vec, fallback);
    const auto& ps = protos[static_cast<std::size_t>(small)];
    int target = -1;
    double td = std::numeric_limits<double>::infinity();
    bool have_large = false;
    for (auto [l, s] : sz) have_large |= (l != small && s >= min_size);
    for (auto [l, s] : sz) {
      if (l == small || (have_large && s < min_size)) continue;
      const double d = kprototypes_distance(ps.numeric, ps.categorical, protos[static_cast<std::size_t>(l)], gamma);
      if (d < td) {
        td = d;
        target = l;
      }
    }
    for (int& l : lab)
      if (l == small) l = target;
  }

  std::map<int, int> compact;
  for (int& l : lab) {
    auto [it, fresh] = compact.try_emplace(l, static_cast<int>(compact.size()));
    (void)fresh;
    l = it->second;
  }
  return lab;
}

}  // namespace matnet::clustering

#include "matnet/clustering/kprototypes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "matnet/error.hpp"
#include "matnet/rng.hpp"

namespace matnet::clustering {

double kprototypes_distance(const std::vector<double>& xr, const std::vector<int>& xc, const Prototype& q,
                            double gamma) {
  double d = 0.0;
  for (std::size_t a = 0; a < xr.size(); ++a) {
    const double e = xr[a] - q.numeric[a];
    d += e * e;
  }
  int mism = 0;
  for (std::size_t a = 0; a < xc.size(); ++a) mism += xc[a] != q.categorical[a];
  return d + gamma * mism;
}

double default_gamma(const WellFeatureMatrix& f) {
  const std::size_t n = f.size(), m = f.numeric_dims();
  if (m == 0 || n == 0) return 1.0;
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += f.numeric[i][a];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (f.numeric[i][a] - mean) * (f.numeric[i][a] - mean);
    total += std::sqrt(var / static_cast<double>(n));
  }
  return 0.5 * total / static_cast<double>(m);
}

double partition_cost(const WellFeatureMatrix& f, const std::vector<int>& labels,
                      const std::vector<Prototype>& protos, double gamma) {
  double c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    c += kprototypes_distance(f.numeric[i], f.categorical[i], protos[static_cast<std::size_t>(labels[i])], gamma);
  return c;
}

namespace {

/// Per-cluster sufficient statistics for incremental prototype updates.
struct ClusterStats {
  int count = 0;
  std::vector<double> sum;
  std::vector<std::vector<int>> freq;  ///< [column][code]
};

class Clusters {
public:
  Clusters(const WellFeatureMatrix& f, std::vector<Prototype> seeds) : f_(f), protos_(std::move(seeds)) {
    stats_.resize(protos_.size());
    for (auto& s : stats_) {
      s.sum.assign(f.numeric_dims(), 0.0);
      s.freq.resize(f.categorical_dims());
      for (std::size_t a = 0; a < f.categorical_dims(); ++a) s.freq[a].assign(f.vocab[a].size(), 0);
    }
  }

  void add(std::size_t i, int l) { update(i, l, +1); }
  void remove(std::size_t i, int l) { update(i, l, -1); }
  const std::vector<Prototype>& prototypes() const { return protos_; }
  int count(int l) const { return stats_[static_cast<std::size_t>(l)].count; }

  /// Recomputes prototypes from scratch to drop accumulated rounding.
  void refresh(const std::vector<int>& labels) {
    for (auto& s : stats_) {
      s.count = 0;
      std::fill(s.sum.begin(), s.sum.end(), 0.0);
      for (auto& fr : s.freq) std::fill(fr.begin(), fr.end(), 0);
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] >= 0) accumulate(i, labels[i], +1);
    for (std::size_t l = 0; l < protos_.size(); ++l) rebuild(static_cast<int>(l));
  }

private:
  void accumulate(std::size_t i, int l, int sign) {
    auto& s = stats_[static_cast<std::size_t>(l)];
    s.count += sign;
    for (std::size_t a = 0; a < s.sum.size(); ++a) s.sum[a] += sign * f_.numeric[i][a];
    for (std::size_t a = 0; a < s.freq.size(); ++a) s.freq[a][static_cast<std::size_t>(f_.categorical[i][a])] += sign;
  }
  void rebuild(int l) {
    const auto& s = stats_[static_cast<std::size_t>(l)];
    auto& p = protos_[static_cast<std::size_t>(l)];
    if (s.count == 0) return;
    for (std::size_t a = 0; a < s.sum.size(); ++a) p.numeric[a] = s.sum[a] / s.count;
    for (std::size_t a = 0; a < s.freq.size(); ++a)
      p.categorical[a] = static_cast<int>(std::max_element(s.freq[a].begin(), s.freq[a].end()) - s.freq[a].begin());
  }
  void update(std::size_t i, int l, int sign) {
    accumulate(i, l, sign);
    rebuild(l);
  }

  const WellFeatureMatrix& f_;
  std::vector<Prototype> protos_;
  std::vector<ClusterStats> stats_;
};

int nearest(const WellFeatureMatrix& f, std::size_t i, const std::vector<Prototype>& protos, double gamma,
            double* dist) {
  int best = 0;
  double bd = kprototypes_distance(f.numeric[i], f.categorical[i], protos[0], gamma);
  for (std::size_t l = 1; l < protos.size(); ++l) {
    const double d = kprototypes_distance(f.numeric[i], f.categorical[i], protos[l], gamma);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(l);
    }
  }
  if (dist) *dist = bd;
  return best;
}

std::vector<std::size_t> seed_plus_plus(const WellFeatureMatrix& f, int k, double gamma, Rng& rng) {
  const std::size_t n = f.size();
  std::vector<std::size_t> seeds{rng.index(n)};
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  auto seed_distance = [&](std::size_t i, std::size_t s) {
    if (f.numeric_dims() > 0) {
      double d = 0.0;
      for (std::size_t a = 0; a < f.numeric_dims(); ++a) {
        const double e = f.numeric[i][a] - f.numeric[s][a];
        d += e * e;
      }
      return d;
    }
    Prototype q{{}, f.categorical[s]};
    return kprototypes_distance(f.numeric[i], f.categorical[i], q, gamma);
  };
  while (seeds.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], seed_distance(i, seeds.back()));
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        u -= d2[i];
        if (u < 0.0) break;
      }
    } else {
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (std::find(seeds.begin(), seeds.end(), i) == seeds.end()) pick = i;
    }
    seeds.push_back(pick);
  }
  return seeds;
}

}  // namespace

std::vector<Prototype> optimal_prototypes(const WellFeatureMatrix& f, const std::vector<int>& labels,
                                          const std::vector<Prototype>& fallback) {
  Clusters c(f, fallback);
  c.refresh(labels);
  return c.prototypes();
}

KPrototypesModel kprototypes_fit_from_seeds(const WellFeatureMatrix& f, const std::vector<std::size_t>& seeds,
                                            double gamma, int max_sweeps, const std::vector<std::size_t>& order) {
  const std::size_t n = f.size();
  const int k = static_cast<int>(seeds.size());
  if (k < 1 || static_cast<std::size_t>(k) > n) throw ConfigError("k-prototypes: k must lie in [1, n]");
  if (!(gamma >= 0.0)) throw ConfigError("k-prototypes: gamma must be non-negative");
  std::vector<std::size_t> visit = order;
  if (visit.empty()) {
    visit.resize(n);
    std::iota(visit.begin(), visit.end(), std::size_t{0});
  }
  if (visit.size() != n) throw ConfigError("k-prototypes: visiting order must cover every object once");

  KPrototypesModel m;
  m.k = k;
  m.gamma = gamma;
  std::vector<Prototype> init;
  for (std::size_t s : seeds) init.push_back({f.numeric[s], f.categorical[s]});
  Clusters c(f, init);

  m.labels.assign(n, -1);
  for (std::size_t i : visit) {
    m.labels[i] = nearest(f, i, c.prototypes(), gamma, nullptr);
    c.add(i, m.labels[i]);
  }
  c.refresh(m.labels);
  m.cost_trace.push_back(partition_cost(f, m.labels, c.prototypes(), gamma));

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    int moves = 0;
    for (std::size_t i : visit) {
      const int cur = m.labels[i];
      double dcur = kprototypes_distance(f.numeric[i], f.categorical[i],
                                         c.prototypes()[static_cast<std::size_t>(cur)], gamma);
      double dbest = dcur;
      int best = cur;
      for (int l = 0; l < k; ++l) {
        if (l == cur) continue;
        const double d = kprototypes_distance(f.numeric[i], f.categorical[i],
                                              c.prototypes()[static_cast<std::size_t>(l)], gamma);
        if (d < dbest) {
          dbest = d;
          best = l;
        }
      }
      if (best != cur) {
        c.remove(i, cur);
        c.add(i, best);
        m.labels[i] = best;
        ++moves;
      }
    }
    c.refresh(m.labels);
    for (int l = 0; l < k; ++l) {
      if (c.count(l) > 0) continue;
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (c.count(m.labels[i]) < 2) continue;
        const double d = kprototypes_distance(f.numeric[i], f.categorical[i],
                                              c.prototypes()[static_cast<std::size_t>(m.labels[i])], gamma);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      if (fd < 0.0) continue;
      m.log.push_back("cluster " + std::to_string(l) + " emptied; re-seeded from well " + f.wells[far]);
      m.labels[far] = l;
      c.refresh(m.labels);
      ++moves;
    }
    ++m.sweeps;
    m.cost_trace.push_back(partition_cost(f, m.labels, c.prototypes(), gamma));
    if (moves == 0) break;
  }
  m.prototypes = c.prototypes();
  m.cost = m.cost_trace.back();
  return m;
}

KPrototypesModel kprototypes_fit(const WellFeatureMatrix& f, int k, const KPrototypesOptions& opt) {
  if (k < 1 || static_cast<std::size_t>(k) > f.size()) throw ConfigError("k-prototypes: k must lie in [1, n]");
  if (opt.n_init < 1) throw ConfigError("k-prototypes: n_init must be at least 1");
  const double gamma = std::isnan(opt.gamma) ? default_gamma(f) : opt.gamma;
  Rng rng(opt.seed);
  KPrototypesModel best;
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int r = 0; r < opt.n_init; ++r) {
    auto seeds = seed_plus_plus(f, k, gamma, rng);
    if (r > 0)
      for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    auto m = kprototypes_fit_from_seeds(f, seeds, gamma, opt.max_sweeps, order);
    if (r == 0 || m.cost < best.cost) best = std::move(m);
  }
  return best;
}

}  // namespace matnet::clustering

#include "matnet/clustering/zone_map.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "matnet/error.hpp"

namespace matnet::clustering {

std::pair<int, int> ZoneMap::cell_of(double x, double y) const {
  const int i = std::clamp(static_cast<int>(std::floor((x - x0) / cell)), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((y - y0) / cell)), 0, ny - 1);
  return {i, j};
}

std::vector<Zone> trace_zones(const std::vector<int>& cells, int nx, int ny, double x0, double y0, double cell) {
  using Vertex = std::pair<int, int>;
  std::set<int> labels(cells.begin(), cells.end());
  std::vector<Zone> zones;
  auto at = [&](int i, int j) { return (i < 0 || j < 0 || i >= nx || j >= ny) ? -1 : cells[static_cast<std::size_t>(j * nx + i)]; };
  for (int lab : labels) {
    std::multimap<Vertex, Vertex> edges;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (at(i, j) != lab) continue;
        if (at(i, j - 1) != lab) edges.emplace(Vertex{i, j}, Vertex{i + 1, j});
        if (at(i + 1, j) != lab) edges.emplace(Vertex{i + 1, j}, Vertex{i + 1, j + 1});
        if (at(i, j + 1) != lab) edges.emplace(Vertex{i + 1, j + 1}, Vertex{i, j + 1});
        if (at(i - 1, j) != lab) edges.emplace(Vertex{i, j + 1}, Vertex{i, j});
      }
    Zone z;
    z.label = lab;
    while (!edges.empty()) {
      auto it = edges.begin();
      const Vertex start = it->first;
      std::vector<Vertex> ring{start};
      Vertex cur = it->second;
      edges.erase(it);
      while (cur != start) {
        ring.push_back(cur);
        auto nxt = edges.find(cur);
        if (nxt == edges.end()) break;
        cur = nxt->second;
        edges.erase(nxt);
      }
      Ring out;
      const std::size_t m = ring.size();
      for (std::size_t a = 0; a < m; ++a) {
        const Vertex& p = ring[(a + m - 1) % m];
        const Vertex& q = ring[a];
        const Vertex& r = ring[(a + 1) % m];
        const bool collinear = (q.first - p.first) * (r.second - q.second) == (q.second - p.second) * (r.first - q.first);
        if (!collinear) out.emplace_back(x0 + q.first * cell, y0 + q.second * cell);
      }
      if (out.size() >= 3) z.rings.push_back(std::move(out));
    }
    zones.push_back(std::move(z));
  }
  return zones;
}

ZoneMap zone_map(const Eigen::MatrixXd& coords, const std::vector<int>& labels, const ZoneOptions& opt) {
  const Eigen::Index n = coords.rows();
  if (coords.cols() != 2) throw ConfigError("zone map: coordinates must have two columns");
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) throw ConfigError("zone map: label count mismatch");
  if (opt.resolution < 2) throw ConfigError("zone map: resolution must be at least 2");
  for (int l : labels)
    if (l < 0) throw ConfigError("zone map: labels must be non-negative");

  ZoneMap z;
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  std::vector<Eigen::Index> train;
  for (Eigen::Index i = 0; i < n; ++i)
    if (counts[labels[static_cast<std::size_t>(i)]] >= 2) train.push_back(i);
  for (auto [l, c] : counts)
    if (c < 2) {
      z.buffer_classes.push_back(l);
      z.log.push_back("class " + std::to_string(l) + " has fewer than 2 wells; rendered as a point-buffer zone");
    }

  const bool have_svm = !train.empty();
  if (have_svm) {
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), 2);
    std::vector<int> yt;
    for (std::size_t a = 0; a < train.size(); ++a) {
      xt.row(static_cast<Eigen::Index>(a)) = coords.row(train[a]);
      yt.push_back(labels[static_cast<std::size_t>(train[a])]);
    }
    z.classifier.fit(xt, yt, opt.c, opt.kernel);
  }

  auto nearest_well = [&](const Eigen::Vector2d& p) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if ((coords.row(i).transpose() - p).squaredNorm() < (coords.row(best).transpose() - p).squaredNorm()) best = i;
    return labels[static_cast<std::size_t>(best)];
  };
  auto classify = [&](const Eigen::Vector2d& p) { return have_svm ? z.classifier.predict(p) : nearest_well(p); };

  z.predicted.resize(static_cast<std::size_t>(n));
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    const bool buffered = counts[l] < 2;
    z.predicted[static_cast<std::size_t>(i)] = buffered ? l : classify(coords.row(i).transpose());
    correct += z.predicted[static_cast<std::size_t>(i)] == l;
  }
  z.training_accuracy = static_cast<double>(correct) / static_cast<double>(n);

  const Eigen::Vector2d lo = coords.colwise().minCoeff().transpose(), hi = coords.colwise().maxCoeff().transpose();
  double extent = std::max(hi(0) - lo(0), hi(1) - lo(1));
  if (!(extent > 0.0)) extent = 1.0;
  const double pad = opt.margin * extent;
  z.x0 = lo(0) - pad;
  z.y0 = lo(1) - pad;
  z.cell = (extent + 2.0 * pad) / opt.resolution;
  z.nx = std::max(1, static_cast<int>(std::ceil((hi(0) - lo(0) + 2.0 * pad) / z.cell - 1e-9)));
  z.ny = std::max(1, static_cast<int>(std::ceil((hi(1) - lo(1) + 2.0 * pad) / z.cell - 1e-9)));
  z.cells.assign(static_cast<std::size_t>(z.nx * z.ny), 0);
  for (int j = 0; j < z.ny; ++j)
    for (int i = 0; i < z.nx; ++i)
      z.cells[static_cast<std::size_t>(j * z.nx + i)] = classify(Eigen::Vector2d(z.center_x(i), z.center_y(j)));

  const double radius = opt.buffer_cells * z.cell;
  for (Eigen::Index w = 0; w < n; ++w) {
    const int l = labels[static_cast<std::size_t>(w)];
    if (counts[l] >= 2) continue;
    for (int j = 0; j < z.ny; ++j)
      for (int i = 0; i < z.nx; ++i)
        if (std::hypot(z.center_x(i) - coords(w, 0), z.center_y(j) - coords(w, 1)) <= radius)
          z.cells[static_cast<std::size_t>(j * z.nx + i)] = l;
  }

  std::map<std::pair<int, int>, int> pinned;
  for (Eigen::Index w = 0; w < n; ++w) {
    const auto c = z.cell_of(coords(w, 0), coords(w, 1));
    const int p = z.predicted[static_cast<std::size_t>(w)];
    auto [it, fresh] = pinned.emplace(c, p);
    if (!fresh && it->second != p)
      z.log.push_back("wells with different predictions share cell (" + std::to_string(c.first) + "," +
                      std::to_string(c.second) + ")");
    z.cells[static_cast<std::size_t>(c.second * z.nx + c.first)] = p;
  }

  z.zones = trace_zones(z.cells, z.nx, z.ny, z.x0, z.y0, z.cell);
  return z;
}

}  // namespace matnet::clustering

#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "matnet/clustering/svm.hpp"

namespace matnet::clustering {

struct ZoneOptions {
  KernelSpec kernel;
  double c = 10.0;
  int resolution = 100;       ///< cells along the longer side of the bounding box
  double margin = 0.05;       ///< bounding-box padding as a fraction of its extent
  double buffer_cells = 2.0;  ///< radius of point-buffer zones, in cells
};

using Ring = std::vector<std::pair<double, double>>;

struct Zone {
  int label = 0;
  std::vector<Ring> rings;  ///< closed rings (first point not repeated); outer rings counter-clockwise
};

struct ZoneMap {
  MultiClassSvm classifier;
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, cell = 1.0;
  std::vector<int> cells;            ///< row-major, index j * nx + i
  std::vector<int> predicted;        ///< per well
  std::vector<int> buffer_classes;   ///< classes rendered as point buffers
  std::vector<Zone> zones;
  double training_accuracy = 0.0;
  std::vector<std::string> log;

  double center_x(int i) const { return x0 + (i + 0.5) * cell; }
  double center_y(int j) const { return y0 + (j + 0.5) * cell; }
  std::pair<int, int> cell_of(double x, double y) const;
  int label_at(int i, int j) const { return cells[static_cast<std::size_t>(j * nx + i)]; }
};

/// Trains a one-vs-rest classifier on well coordinates (n x 2) and labels,
/// rasterizes it over the padded bounding box, pins each well's cell to its
/// predicted label and traces zone boundaries.
ZoneMap zone_map(const Eigen::MatrixXd& coords, const std::vector<int>& labels, const ZoneOptions& opt = {});

/// Boundary rings of every label present in a raster.
std::vector<Zone> trace_zones(const std::vector<int>& cells, int nx, int ny, double x0, double y0, double cell);

}  // namespace matnet::clustering

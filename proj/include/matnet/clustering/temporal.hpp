#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "matnet/clustering/dtw.hpp"
#include "matnet/clustering/features.hpp"

namespace matnet::clustering {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// One well's temporal channels, in a fixed channel order shared by all wells.
struct WellSeries {
  std::string well;
  std::vector<TimeSeries> channels;
};

/// Linear interpolation onto `grid`, clamped at the ends.
TimeSeries resample(const TimeSeries& s, const std::vector<double>& grid);

/// Scales each channel to [0, 1] by its min/max over all wells. Constant
/// channels map to 0.
void normalize_channels(std::vector<WellSeries>& wells);

/// Sum over channels of the normalized DTW between two wells.
double series_distance(const WellSeries& a, const WellSeries& b, const DtwOptions& opt);

struct TemporalModel {
  int k = 0;
  std::vector<int> labels;
  std::vector<std::size_t> medoids;  ///< medoids[l] is a member of cluster l
  double cost = 0.0;                 ///< summed distance of members to their medoid
  std::vector<double> cost_trace;
  int iterations = 0;
  std::vector<std::string> log;
};

/// k-medoids Lloyd iteration on a precomputed symmetric distance matrix.
/// Ties in assignment go to the lower cluster index, ties in the medoid
/// update to the lower series index.
TemporalModel temporal_kmeans(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& initial_medoids,
                              int max_iter = 100);

/// Same, with k-means++-style seeding from `seed`.
TemporalModel temporal_kmeans(const Eigen::MatrixXd& dist, int k, std::uint64_t seed, int max_iter = 100);

/// Mean pairwise distance among `members`; 0 for fewer than two.
double internal_variation(const Eigen::MatrixXd& dist, const std::vector<std::size_t>& members);

/// Recursively splits clusters whose internal variation exceeds `threshold`
/// with k = 2 until all pass or `depth_cap` is reached. Unsplit clusters keep
/// their label; new sub-clusters are appended.
TemporalModel adaptive_split(const TemporalModel& model, const Eigen::MatrixXd& dist, double threshold,
                             int depth_cap = 4);

/// Cross-product of two labelings, then labels with fewer than `min_size`
/// wells are merged into the nearest remaining label by prototype distance.
/// Output labels are compact and numbered by first appearance.
std::vector<int> fuse_labels(const std::vector<int>& spatial, const std::vector<int>& temporal,
                             const WellFeatureMatrix& f, double gamma, std::size_t min_size);

}  // namespace matnet::clustering

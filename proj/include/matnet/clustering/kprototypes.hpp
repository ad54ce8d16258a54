#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "matnet/clustering/features.hpp"

namespace matnet::clustering {

struct Prototype {
  std::vector<double> numeric;
  std::vector<int> categorical;
};

/// Mixed dissimilarity: squared Euclidean on numeric parts plus gamma times
/// the number of categorical mismatches.
double kprototypes_distance(const std::vector<double>& xr, const std::vector<int>& xc, const Prototype& q,
                            double gamma);

/// Half the average standard deviation of the numeric columns; 1 when there
/// are no numeric columns.
double default_gamma(const WellFeatureMatrix& f);

struct KPrototypesOptions {
  double gamma = std::numeric_limits<double>::quiet_NaN();  ///< NaN selects default_gamma
  int max_sweeps = 100;
  int n_init = 1;
  std::uint64_t seed = 0;
};

struct KPrototypesModel {
  int k = 0;
  double gamma = 0.0;
  std::vector<Prototype> prototypes;
  std::vector<int> labels;
  double cost = 0.0;                ///< total cost of the final partition
  std::vector<double> cost_trace;   ///< cost after seeding and after every sweep
  int sweeps = 0;
  std::vector<std::string> log;
};

/// Total cost of a partition against the given prototypes.
double partition_cost(const WellFeatureMatrix& f, const std::vector<int>& labels,
                      const std::vector<Prototype>& protos, double gamma);

/// Optimal prototypes for a fixed partition: member means and per-column
/// modes (ties to the smallest code). Empty clusters keep `fallback`.
std::vector<Prototype> optimal_prototypes(const WellFeatureMatrix& f, const std::vector<int>& labels,
                                          const std::vector<Prototype>& fallback);

/// Online k-prototypes: seeded prototypes, allocation with immediate
/// prototype updates, then reallocation sweeps until no object moves.
/// Restart 0 visits objects in input order; later restarts draw a random
/// visiting order, since online updates make the result order-dependent.
KPrototypesModel kprototypes_fit(const WellFeatureMatrix& f, int k, const KPrototypesOptions& opt = {});

/// Same algorithm from explicit seed objects. `order` is the visiting order
/// for allocation and sweeps; empty means 0..n-1.
KPrototypesModel kprototypes_fit_from_seeds(const WellFeatureMatrix& f, const std::vector<std::size_t>& seeds,
                                            double gamma, int max_sweeps,
                                            const std::vector<std::size_t>& order = {});

}  // namespace matnet::clustering

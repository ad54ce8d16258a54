#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matnet/matbal_history.hpp"

namespace matnet {

enum class Transform { Linear, Log };
enum class PriorKind { Uniform, TruncatedNormal };

/// One uncertain parameter. Names bind into the network:
/// `ooip:B` (N_foi of block B), `tij:I:J`, `tmax`, `wei:B`, `j:B`.
struct ParameterSpec {
  std::string name;
  double lower = 0.0;  ///< physical units
  double upper = 0.0;
  Transform transform = Transform::Log;
  PriorKind prior = PriorKind::Uniform;
  double prior_mean = 0.0;  ///< transformed space, truncated normal only
  double prior_std = 0.0;   ///< transformed space, truncated normal only
};

class ParameterSpace {
public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterSpec> specs);

  std::size_t size() const { return specs_.size(); }
  const std::vector<ParameterSpec>& specs() const { return specs_; }
  std::size_t index_of(const std::string& name) const;

  double lower_internal(std::size_t k) const;
  double upper_internal(std::size_t k) const;
  Eigen::VectorXd to_internal(const Eigen::VectorXd& physical) const;
  Eigen::VectorXd to_physical(const Eigen::VectorXd& internal) const;
  /// Clips an internal vector to bounds; returns the number of clipped entries.
  int clip(Eigen::Ref<Eigen::VectorXd> internal) const;

  void validate() const;

private:
  std::vector<ParameterSpec> specs_;
};

/// Block pressures observed at schedule times.
struct ObservationSet {
  std::vector<double> times;
  std::vector<int> blocks;
  Eigen::VectorXd values;  ///< psia
  Eigen::VectorXd sigma;   ///< base measurement std, psi

  std::size_t size() const { return times.size(); }
  void validate(std::size_t n_blocks) const;
  /// Replaces non-positive entries of `file_std` by max(1% of max |obs|, floor).
  static Eigen::VectorXd base_std(const Eigen::VectorXd& values, const Eigen::VectorXd& file_std, double floor);
};

struct HistoryMatchProblem {
  ReservoirNetwork base;
  HistorySchedule schedule;
  SolverConfig solver;
  ParameterSpace space;
  ObservationSet observations;

  void validate() const;
};

/// Copy of `base` with physical parameter values substituted; transmissibilities
/// are clipped to [0, T_max].
ReservoirNetwork bind_parameters(const ReservoirNetwork& base, const ParameterSpace& space,
                                 const Eigen::VectorXd& physical);

/// Pressures of `result` sampled at the observation times (linear
/// interpolation between records).
Eigen::VectorXd sample_observations(const HistoryResult& result, const ObservationSet& obs);

struct ForwardResult {
  bool ok = false;
  Eigen::VectorXd data;
  std::string error;
};

/// Runs the history model for one internal parameter vector.
ForwardResult forward(const HistoryMatchProblem& problem, const Eigen::VectorXd& internal);

/// Mean squared pressure mismatch.
double objective(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed);

/// w = 1 / (1 + r^2), elementwise.
Eigen::VectorXd cauchy_reweight(const Eigen::VectorXd& r);

/// Standardized residual r = (d_obs - mean prediction) / robust scale, the
/// scale being 1.4826 times the median absolute deviation.
Eigen::VectorXd standardized_residual(const Eigen::VectorXd& observed, const Eigen::VectorXd& mean_prediction);

/// m_j + C_MD (C_DD + alpha C_D)^-1 (d_j - g_j) for every column j.
/// `m` is n_m x N_e, `g` and `d` are N_d x N_e, `cd` is diag(C_D).
Eigen::MatrixXd es_rlm_update(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g, const Eigen::MatrixXd& d,
                              const Eigen::VectorXd& cd, double alpha);

struct EsConfig {
  int n_e = 50;
  int max_iters = 20;
  double threshold = 0.01;  ///< relative change of objective and of parameter means
  double alpha0 = 0.0;      ///< <= 0 selects trace(C_DD) / trace(C_D)
  int max_retries = 5;
  bool perturb_observations = true;
  int restarts = 1;
  std::uint64_t seed = 0;
  bool parallel = true;

  void validate() const;
};

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};
BoxStats box_stats(std::vector<double> v);

struct IterationRecord {
  int iteration = 0;
  double alpha = 0.0;
  double objective_mean = 0.0;
  int failed = 0;
  int retries = 0;
  Eigen::MatrixXd physical;         ///< n_m x N_e
  std::vector<double> objectives;   ///< per member, NaN for failed
  std::vector<BoxStats> params;     ///< per parameter, physical units
};

struct HistoryMatchResult {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;  ///< iterations[0] is the prior
  bool converged = false;
  std::string stop_reason;
  std::vector<std::string> log;

  const IterationRecord& final_iteration() const { return iterations.back(); }
};

/// Draws N_e prior members in internal coordinates.
Eigen::MatrixXd sample_prior(const ParameterSpace& space, int n_e, std::uint64_t seed);

/// Iterative ES-rLM. `initial` (internal, n_m x N_e) overrides the prior draw.
HistoryMatchResult run_history_match(const HistoryMatchProblem& problem, const EsConfig& cfg,
                                     const std::optional<Eigen::MatrixXd>& initial = std::nullopt);

/// Independent runs with seeds cfg.seed, cfg.seed + 1, ...
std::vector<HistoryMatchResult> run_history_match_restarts(const HistoryMatchProblem& problem, const EsConfig& cfg);

}  // namespace matnet

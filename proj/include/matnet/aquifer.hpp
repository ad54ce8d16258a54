#pragma once

#include <optional>
#include <span>
#include <vector>

namespace matnet {

/// Fetkovich pseudo-steady aquifer attached to one block.
struct AquiferParams {
  double wei = 0.0;     ///< maximum encroachable water, RB
  double j = 0.0;       ///< productivity index, RB/(psi*day)
  double p_init = 0.0;  ///< initial aquifer pressure (the block's), psia

  /// W_ei = c_t * W_i * p_i * theta/360.
  static AquiferParams from_volume(double wi, double theta_deg, double ct, double p_init, double j);
  void validate() const;

  /// exp(-J p_i dt / W_ei)
  double decay(double dt) const;
};

namespace aquifer {

/// One step of the midpoint-pressure recursion.
double step_recursive(const AquiferParams& a, double we_prev, double p_prev, double p_curr, double dt);

/// Closed-form cumulative influx after step n (1-based) using p^n in place of
/// the step-average pressure. pressures[k-1] and dts[k-1] belong to step k.
double closed_form(const AquiferParams& a, std::span<const double> pressures,
                   std::span<const double> dts, std::size_t n);

/// dW_e^k / dp_j for 1-based step indices; zero when j > k.
double dwe_dp(const AquiferParams& a, std::span<const double> dts, std::size_t k, std::size_t j);

}  // namespace aquifer

/// Pressure/step history of one aquifer as seen by a time-marching solver.
/// Earlier pressures are frozen; only the pending step's pressure is free.
class AquiferTracker {
public:
  AquiferTracker() = default;
  explicit AquiferTracker(std::optional<AquiferParams> params) : params_(std::move(params)) {}

  bool active() const { return params_.has_value(); }
  /// W_e after a pending step of length dt ending at pressure p.
  double influx(double p, double dt) const;
  /// d influx / d p for the pending step.
  double dinflux_dp(double dt) const;
  void commit(double p, double dt);
  double current() const { return we_.empty() ? 0.0 : we_.back(); }

  const std::vector<double>& pressures() const { return pressures_; }
  const std::vector<double>& dts() const { return dts_; }

private:
  std::optional<AquiferParams> params_;
  std::vector<double> pressures_;
  std::vector<double> dts_;
  std::vector<double> we_;
};

}  // namespace matnet

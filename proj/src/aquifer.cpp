#include "matnet/aquifer.hpp"

#include <cmath>

#include "matnet/error.hpp"

namespace matnet {

AquiferParams AquiferParams::from_volume(double wi, double theta_deg, double ct, double p_init,
                                         double j) {
  if (!(theta_deg > 0.0 && theta_deg <= 360.0))
    throw ConfigError("aquifer: theta must be in (0, 360]");
  AquiferParams a;
  a.wei = ct * wi * p_init * (theta_deg / 360.0);
  a.j = j;
  a.p_init = p_init;
  a.validate();
  return a;
}

void AquiferParams::validate() const {
  if (!(wei > 0.0) || !std::isfinite(wei)) throw ConfigError("aquifer: wei must be > 0");
  if (!(j >= 0.0) || !std::isfinite(j)) throw ConfigError("aquifer: j must be >= 0");
  if (!(p_init > 0.0)) throw ConfigError("aquifer: initial pressure must be > 0");
}

double AquiferParams::decay(double dt) const { return std::exp(-j * p_init * dt / wei); }

namespace aquifer {

double step_recursive(const AquiferParams& a, double we_prev, double p_prev, double p_curr,
                      double dt) {
  const double drive = a.p_init * (1.0 - we_prev / a.wei) - 0.5 * (p_curr + p_prev);
  return we_prev + (a.wei / a.p_init) * drive * (1.0 - a.decay(dt));
}

double closed_form(const AquiferParams& a, std::span<const double> pressures,
                   std::span<const double> dts, std::size_t n) {
  if (n > pressures.size() || n > dts.size())
    throw Error("aquifer: step index " + std::to_string(n) + " exceeds history length");
  // t^n - t^k = sum of dts over steps k+1..n, accumulated backwards.
  const double rate = a.j * a.p_init / a.wei;
  double we = 0.0;
  double elapsed = 0.0;
  for (std::size_t k = n; k >= 1; --k) {
    const double c = (a.wei / a.p_init) * (1.0 - std::exp(-rate * dts[k - 1]));
    we += c * std::exp(-rate * elapsed) * (a.p_init - pressures[k - 1]);
    elapsed += dts[k - 1];
  }
  return we;
}

double dwe_dp(const AquiferParams& a, std::span<const double> dts, std::size_t k, std::size_t j) {
  if (j > k || j == 0) return 0.0;
  if (k > dts.size()) throw Error("aquifer: step index exceeds history length");
  const double rate = a.j * a.p_init / a.wei;
  double elapsed = 0.0;
  for (std::size_t m = j + 1; m <= k; ++m) elapsed += dts[m - 1];
  return -(a.wei / a.p_init) * (1.0 - std::exp(-rate * dts[j - 1])) * std::exp(-rate * elapsed);
}

}  // namespace aquifer

double AquiferTracker::influx(double p, double dt) const {
  if (!params_) return 0.0;
  const auto& a = *params_;
  const double rate = a.j * a.p_init / a.wei;
  double we = (a.wei / a.p_init) * (1.0 - std::exp(-rate * dt)) * (a.p_init - p);
  double elapsed = dt;
  for (std::size_t k = pressures_.size(); k >= 1; --k) {
    const double c = (a.wei / a.p_init) * (1.0 - std::exp(-rate * dts_[k - 1]));
    we += c * std::exp(-rate * elapsed) * (a.p_init - pressures_[k - 1]);
    elapsed += dts_[k - 1];
  }
  return we;
}

double AquiferTracker::dinflux_dp(double dt) const {
  if (!params_) return 0.0;
  const auto& a = *params_;
  return -(a.wei / a.p_init) * (1.0 - a.decay(dt));
}

void AquiferTracker::commit(double p, double dt) {
  if (!params_) {
    we_.push_back(0.0);
    return;
  }
  we_.push_back(influx(p, dt));
  pressures_.push_back(p);
  dts_.push_back(dt);
}

}  // namespace matnet

#pragma once

#include <filesystem>
#include <vector>

#include "matnet/table.hpp"

namespace matnet {

/// Two-phase-style curves on a shared saturation grid: k_ro tabulated against
/// S_o, k_rw against S_w and k_rg against S_g.
class RelPermCurves {
public:
  RelPermCurves() = default;
  RelPermCurves(std::vector<double> s, std::vector<double> kro, std::vector<double> krw,
                std::vector<double> krg);

  double kro(double so) const { return kro_.value(so); }
  double krw(double sw) const { return krw_.value(sw); }
  double krg(double sg) const { return krg_.value(sg); }
  double dkro(double so) const { return kro_.slope(so); }
  double dkrw(double sw) const { return krw_.slope(sw); }
  double dkrg(double sg) const { return krg_.slope(sg); }

  /// k_r of phase 0 = oil, 1 = gas, 2 = water at that phase's saturation.
  double kr(int phase, double s) const;

  static RelPermCurves load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;

private:
  LinearTable kro_, krw_, krg_;
};

}  // namespace matnet

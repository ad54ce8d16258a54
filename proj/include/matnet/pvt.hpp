#pragma once

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

#include "matnet/table.hpp"

namespace matnet {

enum class Property : int {
  Bo = 0, Bg, Bw, Rs, Rv, MuO, MuG, MuW, RhoO, RhoG, RhoW,
};

inline constexpr std::size_t kPropertyCount = 11;

/// Column name used in the PVT CSV header ("bo", "muo", ...).
std::string_view property_name(Property p);
/// Inverse of property_name; throws ConfigError for unknown names.
Property property_from_name(std::string_view name);

/// Pressure-indexed black-oil properties, immutable after construction.
///
/// Units: p psia, Bo/Bw RB/STB, Bg RB/scf, Rs scf/STB, Rv STB/scf,
/// viscosities cP, densities lbm/ft3.
class PvtTable {
public:
  struct Columns {
    std::vector<double> p;
    std::array<std::vector<double>, kPropertyCount> values;
  };

  PvtTable() = default;
  /// Validates every invariant; throws ConfigError on violation.
  explicit PvtTable(Columns columns);

  double eval(Property prop, double p) const { return tables_[idx(prop)].value(p); }
  double eval_dp(Property prop, double p) const { return tables_[idx(prop)].slope(p); }

  std::span<const double> pressure_nodes() const { return tables_[0].x(); }
  std::span<const double> column(Property prop) const { return tables_[idx(prop)].y(); }
  double p_min() const { return pressure_nodes().front(); }
  double p_max() const { return pressure_nodes().back(); }
  bool empty() const { return tables_[0].empty(); }

  static PvtTable load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;

private:
  static std::size_t idx(Property prop);
  std::array<LinearTable, kPropertyCount> tables_;
};

/// Snapshot of every property and its pressure derivative at one pressure.
struct PvtPoint {
  double bo, bg, bw, rs, rv, muo, mug, muw, rhoo, rhog, rhow;
  double dbo, dbg, dbw, drs, drv, dmuo, dmug, dmuw, drhoo, drhog, drhow;

  static PvtPoint at(const PvtTable& table, double p);
};

}  // namespace matnet

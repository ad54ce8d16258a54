#include "matnet/pvt.hpp"

#include <cmath>

#include "matnet/csv.hpp"
#include "matnet/error.hpp"

namespace matnet {
namespace {

constexpr std::array<std::string_view, kPropertyCount> kNames = {
    "bo", "bg", "bw", "rs", "rv", "muo", "mug", "muw", "rhoo", "rhog", "rhow"};

bool must_be_positive(Property p) { return p != Property::Rs && p != Property::Rv; }

}  // namespace

std::string_view property_name(Property p) { return kNames[static_cast<std::size_t>(p)]; }

Property property_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<Property>(i);
  throw ConfigError("unknown PVT property '" + std::string(name) + "'");
}

std::size_t PvtTable::idx(Property prop) {
  auto i = static_cast<std::size_t>(prop);
  if (i >= kPropertyCount) throw ConfigError("unknown PVT property id " + std::to_string(i));
  return i;
}

PvtTable::PvtTable(Columns columns) {
  const auto& p = columns.p;
  for (std::size_t k = 0; k < kPropertyCount; ++k) {
    const auto prop = static_cast<Property>(k);
    const auto& col = columns.values[k];
    const std::string name = "PVT column " + std::string(kNames[k]);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (must_be_positive(prop) && !(col[i] > 0.0))
        throw ConfigError(name + ": value must be > 0 at node " + std::to_string(i));
      if (!must_be_positive(prop) && !(col[i] >= 0.0))
        throw ConfigError(name + ": value must be >= 0 at node " + std::to_string(i));
    }
    tables_[k] = LinearTable(p, col, name);
  }
  const auto& rs = columns.values[idx(Property::Rs)];
  const auto& rv = columns.values[idx(Property::Rv)];
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!(1.0 - rs[i] * rv[i] > 0.0))
      throw ConfigError("PVT: 1 - Rs*Rv must be > 0 (node " + std::to_string(i) + ")");
  // Rs*Rv is quadratic inside a segment and can peak between nodes.
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double a = rs[i], b = rs[i + 1] - rs[i], c = rv[i], d = rv[i + 1] - rv[i];
    if (b * d >= 0.0) continue;
    const double t = -(a * d + b * c) / (2.0 * b * d);
    if (t > 0.0 && t < 1.0 && !(1.0 - (a + b * t) * (c + d * t) > 0.0))
      throw ConfigError("PVT: 1 - Rs*Rv must be > 0 inside segment " + std::to_string(i));
  }
}

PvtTable PvtTable::load_csv(const std::filesystem::path& path) {
  auto t = csv::read(path);
  Columns c;
  auto pc = t.column("p");
  std::array<std::size_t, kPropertyCount> cols{};
  for (std::size_t k = 0; k < kPropertyCount; ++k) cols[k] = t.column(kNames[k]);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    c.p.push_back(t.number(r, pc));
    if (r > 0 && !(c.p[r] > c.p[r - 1]))
      throw IngestError(t.source, t.lines[r], "pressure must be strictly ascending");
    for (std::size_t k = 0; k < kPropertyCount; ++k) c.values[k].push_back(t.number(r, cols[k]));
  }
  if (c.p.size() < 2) throw IngestError(t.source, 0, "PVT table needs at least two pressure nodes");
  try {
    return PvtTable(std::move(c));
  } catch (const ConfigError& e) {
    throw IngestError(t.source, 0, e.what());
  }
}

void PvtTable::save_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header{"p"};
  for (auto n : kNames) header.emplace_back(n);
  csv::Writer w(path, header);
  auto p = pressure_nodes();
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<std::string> row{csv::fmt(p[i])};
    for (std::size_t k = 0; k < kPropertyCount; ++k) row.push_back(csv::fmt(tables_[k].y()[i]));
    w.row(row);
  }
}

PvtPoint PvtPoint::at(const PvtTable& t, double p) {
  PvtPoint s{};
  s.bo = t.eval(Property::Bo, p);
  s.bg = t.eval(Property::Bg, p);
  s.bw = t.eval(Property::Bw, p);
  s.rs = t.eval(Property::Rs, p);
  s.rv = t.eval(Property::Rv, p);
  s.muo = t.eval(Property::MuO, p);
  s.mug = t.eval(Property::MuG, p);
  s.muw = t.eval(Property::MuW, p);
  s.rhoo = t.eval(Property::RhoO, p);
  s.rhog = t.eval(Property::RhoG, p);
  s.rhow = t.eval(Property::RhoW, p);
  s.dbo = t.eval_dp(Property::Bo, p);
  s.dbg = t.eval_dp(Property::Bg, p);
  s.dbw = t.eval_dp(Property::Bw, p);
  s.drs = t.eval_dp(Property::Rs, p);
  s.drv = t.eval_dp(Property::Rv, p);
  s.dmuo = t.eval_dp(Property::MuO, p);
  s.dmug = t.eval_dp(Property::MuG, p);
  s.dmuw = t.eval_dp(Property::MuW, p);
  s.drhoo = t.eval_dp(Property::RhoO, p);
  s.drhog = t.eval_dp(Property::RhoG, p);
  s.drhow = t.eval_dp(Property::RhoW, p);
  return s;
}

}  // namespace matnet

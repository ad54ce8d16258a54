#include "matnet/relperm.hpp"

#include "matnet/csv.hpp"
#include "matnet/error.hpp"

namespace matnet {
namespace {

void check_unit_range(const std::vector<double>& v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] >= 0.0 && v[i] <= 1.0))
      throw ConfigError(std::string("relperm ") + name + ": value outside [0,1] at node " +
                        std::to_string(i));
}

}  // namespace

RelPermCurves::RelPermCurves(std::vector<double> s, std::vector<double> kro,
                             std::vector<double> krw, std::vector<double> krg) {
  check_unit_range(s, "saturation");
  check_unit_range(kro, "kro");
  check_unit_range(krw, "krw");
  check_unit_range(krg, "krg");
  kro_ = LinearTable(s, std::move(kro), "relperm kro");
  krw_ = LinearTable(s, std::move(krw), "relperm krw");
  krg_ = LinearTable(std::move(s), std::move(krg), "relperm krg");
}

double RelPermCurves::kr(int phase, double s) const {
  switch (phase) {
    case 0: return kro(s);
    case 1: return krg(s);
    case 2: return krw(s);
  }
  throw Error("relperm: phase index out of range");
}

RelPermCurves RelPermCurves::load_csv(const std::filesystem::path& path) {
  auto t = csv::read(path);
  auto cs = t.column("s"), co = t.column("kro"), cw = t.column("krw"), cg = t.column("krg");
  std::vector<double> s, kro, krw, krg;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s.push_back(t.number(r, cs));
    kro.push_back(t.number(r, co));
    krw.push_back(t.number(r, cw));
    krg.push_back(t.number(r, cg));
  }
  try {
    return RelPermCurves(std::move(s), std::move(kro), std::move(krw), std::move(krg));
  } catch (const ConfigError& e) {
    throw IngestError(t.source, 0, e.what());
  }
}

void RelPermCurves::save_csv(const std::filesystem::path& path) const {
  csv::Writer w(path, {"s", "kro", "krw", "krg"});
  auto s = kro_.x();
  for (std::size_t i = 0; i < s.size(); ++i)
    w.row({csv::fmt(s[i]), csv::fmt(kro_.y()[i]), csv::fmt(krw_.y()[i]), csv::fmt(krg_.y()[i])});
}

}  // namespace matnet

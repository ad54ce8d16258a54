#include "matnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"

#include "matnet/csv.hpp"
#include "matnet/error.hpp"

namespace matnet::io {

namespace {

const json& require(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(what + " must be finite");
  return d;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& context) {
  return obj.contains(key) ? number(obj.at(key), context + "." + key) : fallback;
}

int integer_or(const json& obj, const std::string& key, int fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(context + "." + key + " must be an integer");
  return v.get<int>();
}

bool bool_or(const json& obj, const std::string& key, bool fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(context + "." + key + " must be true or false");
  return v.get<bool>();
}

std::size_t block_index(const csv::Table& t, std::size_t row, std::size_t col, std::size_t n_blocks) {
  const long b = t.integer(row, col);
  if (b < 0 || static_cast<std::size_t>(b) >= n_blocks)
    throw IngestError(t.source, t.lines[row], "block " + std::to_string(b) + " out of range");
  return static_cast<std::size_t>(b);
}

/// Groups rows by time (rows for one time must be contiguous and list each
/// block exactly once).
template <class Row, class Fill>
void group_rows(const csv::Table& t, std::size_t n_blocks, std::vector<double>& times,
                std::vector<std::vector<Row>>& rows, Fill fill) {
  const std::size_t ct = t.column("time"), cb = t.column("block");
  std::vector<std::vector<bool>> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double time = t.number(r, ct);
    if (times.empty() || time != times.back()) {
      if (!times.empty() && !(time > times.back()))
        throw IngestError(t.source, t.lines[r], "times must be grouped and increasing");
      if (!seen.empty() && std::count(seen.back().begin(), seen.back().end(), true) != static_cast<long>(n_blocks))
        throw IngestError(t.source, t.lines[r], "previous time does not list every block");
      times.push_back(time);
      rows.emplace_back(n_blocks);
      seen.emplace_back(n_blocks, false);
    }
    const std::size_t b = block_index(t, r, cb, n_blocks);
    if (seen.back()[b]) throw IngestError(t.source, t.lines[r], "duplicate block for this time");
    seen.back()[b] = true;
    fill(rows.back()[b], r, b);
  }
  if (times.empty()) throw IngestError(t.source, 1, "no data rows");
  if (std::count(seen.back().begin(), seen.back().end(), true) != static_cast<long>(n_blocks))
    throw IngestError(t.source, t.lines.back(), "last time does not list every block");
}

fs::path resolve(const fs::path& base, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : base.parent_path() / p;
}

}  // namespace

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::stod(csv::fmt(v));
}

namespace {

json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json o = json::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = toml_to_json(v);
    return o;
  }
  if (const auto* a = n.as_array()) {
    json arr = json::array();
    for (const auto& v : *a) arr.push_back(toml_to_json(v));
    return arr;
  }
  if (const auto* v = n.as_integer()) {
    const std::int64_t i = v->get();
    return i >= 0 ? json(static_cast<std::uint64_t>(i)) : json(i);
  }
  if (const auto* v = n.as_floating_point()) return json(v->get());
  if (const auto* v = n.as_boolean()) return json(v->get());
  if (const auto* v = n.as_string()) return json(v->get());
  std::ostringstream os;
  if (const auto* v = n.as_date()) os << v->get();
  else if (const auto* v = n.as_time()) os << v->get();
  else if (const auto* v = n.as_date_time()) os << v->get();
  return json(os.str());
}

}  // namespace

json parse_toml(std::string_view text, const std::string& source) {
  try {
    return toml_to_json(toml::parse(text, source));
  } catch (const toml::parse_error& e) {
    throw IngestError(source, static_cast<std::size_t>(e.source().begin.line), std::string(e.description()));
  }
}

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const std::string ext = path.extension().string();
  const bool is_toml = ext == ".toml" || (ext != ".json" && (first == std::string::npos || text[first] != '{'));
  json j;
  if (is_toml) {
    j = parse_toml(text, path.string());
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": top level must be an object");
  return j;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(context + ": unknown key '" + it.key() + "'");
}

ReservoirNetwork load_network(const fs::path& path) {
  const json j = load_config(path);
  const std::string ctx = path.string();
  check_keys(j, {"t_max", "blocks", "connections"}, ctx);
  std::map<std::string, std::shared_ptr<const PvtTable>> pvts;
  std::map<std::string, std::shared_ptr<const RelPermCurves>> kr;

  std::vector<Block> blocks;
  const auto& jb = require(j, "blocks", ctx);
  if (!jb.is_array() || jb.empty()) throw ConfigError(ctx + ": blocks must be a nonempty array");
  for (std::size_t k = 0; k < jb.size(); ++k) {
    const auto& o = jb[k];
    const std::string c = ctx + " blocks[" + std::to_string(k) + "]";
    check_keys(o, {"id", "n_foi", "g_fgi", "s_wi", "c_f", "c_w", "p_init", "z", "pvt", "relperm", "aquifer"}, c);
    Block b;
    b.id = integer_or(o, "id", static_cast<int>(k), c);
    b.n_foi = number(require(o, "n_foi", c), c + ".n_foi");
    b.g_fgi = number_or(o, "g_fgi", 0.0, c);
    b.s_wi = number(require(o, "s_wi", c), c + ".s_wi");
    b.c_f = number(require(o, "c_f", c), c + ".c_f");
    b.c_w = number(require(o, "c_w", c), c + ".c_w");
    b.p_init = number(require(o, "p_init", c), c + ".p_init");
    b.z = number_or(o, "z", 0.0, c);
    const auto& pv = require(o, "pvt", c);
    const auto& rp = require(o, "relperm", c);
    if (!pv.is_string() || !rp.is_string()) throw ConfigError(c + ": pvt and relperm must be file paths");
    const auto pvt_path = resolve(path, pv.get<std::string>()).string();
    const auto kr_path = resolve(path, rp.get<std::string>()).string();
    if (!pvts.count(pvt_path)) pvts[pvt_path] = std::make_shared<const PvtTable>(PvtTable::load_csv(pvt_path));
    if (!kr.count(kr_path)) kr[kr_path] = std::make_shared<const RelPermCurves>(RelPermCurves::load_csv(kr_path));
    b.pvt = pvts[pvt_path];
    b.relperm = kr[kr_path];
    if (o.contains("aquifer") && !o.at("aquifer").is_null()) {
      const auto& a = o.at("aquifer");
      const std::string ca = c + ".aquifer";
      if (a.contains("wei")) {
        check_keys(a, {"wei", "j"}, ca);
        b.aquifer = AquiferParams{number(a.at("wei"), ca + ".wei"), number(require(a, "j", ca), ca + ".j"), b.p_init};
      } else {
        check_keys(a, {"wi", "theta", "ct", "j"}, ca);
        b.aquifer = AquiferParams::from_volume(number(require(a, "wi", ca), ca + ".wi"),
                                               number(require(a, "theta", ca), ca + ".theta"),
                                               number(require(a, "ct", ca), ca + ".ct"), b.p_init,
                                               number(require(a, "j", ca), ca + ".j"));
      }
    }
    blocks.push_back(std::move(b));
  }

  std::vector<Connection> conns;
  if (j.contains("connections")) {
    const auto& jc = j.at("connections");
    if (!jc.is_array()) throw ConfigError(ctx + ": connections must be an array");
    for (std::size_t k = 0; k < jc.size(); ++k) {
      const std::string c = ctx + " connections[" + std::to_string(k) + "]";
      check_keys(jc[k], {"i", "j", "t_ij"}, c);
      Connection cn;
      cn.i = integer_or(jc[k], "i", -1, c);
      cn.j = integer_or(jc[k], "j", -1, c);
      cn.t = number(require(jc[k], "t_ij", c), c + ".t_ij");
      conns.push_back(cn);
    }
  }
  double t_max = number_or(j, "t_max", 0.0, ctx);
  if (!j.contains("t_max"))
    for (const auto& c : conns) t_max = std::max(t_max, c.t);
  ReservoirNetwork net(std::move(blocks), std::move(conns), t_max);
  net.validate();
  return net;
}

void save_network(const fs::path& path, const ReservoirNetwork& net) {
  std::vector<const PvtTable*> pvts;
  std::vector<const RelPermCurves*> krs;
  for (const auto& b : net.blocks()) {
    if (std::find(pvts.begin(), pvts.end(), b.pvt.get()) == pvts.end()) pvts.push_back(b.pvt.get());
    if (std::find(krs.begin(), krs.end(), b.relperm.get()) == krs.end()) krs.push_back(b.relperm.get());
  }
  const std::string stem = path.stem().string();
  auto name = [&](const char* kind, std::size_t k, std::size_t n) {
    return stem + "_" + kind + (n > 1 ? "_" + std::to_string(k) : std::string{}) + ".csv";
  };
  for (std::size_t k = 0; k < pvts.size(); ++k) pvts[k]->save_csv(path.parent_path() / name("pvt", k, pvts.size()));
  for (std::size_t k = 0; k < krs.size(); ++k) krs[k]->save_csv(path.parent_path() / name("relperm", k, krs.size()));

  json j;
  j["t_max"] = round12(net.t_max());
  j["blocks"] = json::array();
  for (const auto& b : net.blocks()) {
    json o;
    o["id"] = b.id;
    o["n_foi"] = round12(b.n_foi);
    o["g_fgi"] = round12(b.g_fgi);
    o["s_wi"] = round12(b.s_wi);
    o["c_f"] = round12(b.c_f);
    o["c_w"] = round12(b.c_w);
    o["p_init"] = round12(b.p_init);
    o["z"] = round12(b.z);
    o["pvt"] = name("pvt", static_cast<std::size_t>(std::find(pvts.begin(), pvts.end(), b.pvt.get()) - pvts.begin()),
                    pvts.size());
    o["relperm"] = name("relperm",
                        static_cast<std::size_t>(std::find(krs.begin(), krs.end(), b.relperm.get()) - krs.begin()),
                        krs.size());
    if (b.aquifer) o["aquifer"] = {{"wei", round12(b.aquifer->wei)}, {"j", round12(b.aquifer->j)}};
    j["blocks"].push_back(o);
  }
  j["connections"] = json::array();
  for (const auto& c : net.connections()) j["connections"].push_back({{"i", c.i}, {"j", c.j}, {"t_ij", round12(c.t)}});
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

HistorySchedule load_history(const fs::path& path, std::size_t n_blocks) {
  const auto t = csv::read(path);
  const std::size_t cnp = t.column("np"), cgp = t.column("gp"), cwp = t.column("wp"), cgi = t.column("ginj"),
                    cwi = t.column("winj");
  const bool has_p = t.has_column("pobs");
  const std::size_t cp = has_p ? t.column("pobs") : 0;
  HistorySchedule s;
  struct Row {
    Cumulatives c;
    double p = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<std::vector<Row>> rows;
  group_rows<Row>(t, n_blocks, s.times, rows, [&](Row& row, std::size_t r, std::size_t) {
    row.c = {t.number(r, cnp), t.number(r, cgp), t.number(r, cwp), t.number(r, cgi), t.number(r, cwi)};
    if (has_p && !t.missing(r, cp)) row.p = t.number(r, cp);
  });
  for (const auto& rr : rows) {
    s.cum.emplace_back();
    if (has_p) s.p_obs.emplace_back();
    for (const auto& row : rr) {
      s.cum.back().push_back(row.c);
      if (has_p) s.p_obs.back().push_back(row.p);
    }
  }
  try {
    s.validate(n_blocks);
  } catch (const ConfigError& e) {
    throw IngestError(t.source, 0, e.what());
  }
  return s;
}

void save_history(const fs::path& path, const HistorySchedule& s) {
  std::vector<std::string> header{"time", "block", "np", "gp", "wp", "ginj", "winj"};
  if (!s.p_obs.empty()) header.push_back("pobs");
  csv::Writer w(path, header);
  for (std::size_t n = 0; n < s.steps(); ++n)
    for (std::size_t b = 0; b < s.cum[n].size(); ++b) {
      const auto& c = s.cum[n][b];
      std::vector<std::string> cells{csv::fmt(s.times[n]), std::to_string(b), csv::fmt(c.np), csv::fmt(c.gp),
                                     csv::fmt(c.wp),       csv::fmt(c.ginj), csv::fmt(c.winj)};
      if (!s.p_obs.empty()) cells.push_back(std::isnan(s.p_obs[n][b]) ? "" : csv::fmt(s.p_obs[n][b]));
      w.row(cells);
    }
}

ForecastSchedule load_forecast_schedule(const fs::path& path, std::size_t n_blocks) {
  const auto t = csv::read(path);
  const std::size_t cpwf = t.column("pwf"), cq = t.column("qlmax"), cn = t.column("nproducers"),
                    cgi = t.column("ginj"), cwi = t.column("winj");
  ForecastSchedule s;
  group_rows<ForecastControl>(t, n_blocks, s.times, s.rows, [&](ForecastControl& c, std::size_t r, std::size_t) {
    c.pwf = t.number(r, cpwf);
    c.qlmax = t.number(r, cq);
    c.n_producers = static_cast<int>(t.integer(r, cn));
    c.ginj = t.number(r, cgi);
    c.winj = t.number(r, cwi);
  });
  try {
    s.validate(n_blocks);
  } catch (const ConfigError& e) {
    throw IngestError(t.source, 0, e.what());
  }
  return s;
}

void save_forecast_schedule(const fs::path& path, const ForecastSchedule& s) {
  csv::Writer w(path, {"time", "block", "pwf", "qlmax", "nproducers", "ginj", "winj"});
  for (std::size_t n = 0; n < s.steps(); ++n)
    for (std::size_t b = 0; b < s.rows[n].size(); ++b) {
      const auto& c = s.rows[n][b];
      w.row({csv::fmt(s.times[n]), std::to_string(b), csv::fmt(c.pwf), csv::fmt(c.qlmax),
             std::to_string(c.n_producers), csv::fmt(c.ginj), csv::fmt(c.winj)});
    }
}

ObservationSet load_observations(const fs::path& path, double std_floor) {
  const auto t = csv::read(path);
  const std::size_t ct = t.column("time"), cb = t.column("block"), cp = t.column("pobs"), cs = t.column("std");
  ObservationSet o;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  if (n == 0) throw IngestError(t.source, 1, "no observations");
  o.values.resize(n);
  Eigen::VectorXd file_std(n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    o.times.push_back(t.number(r, ct));
    const long b = t.integer(r, cb);
    if (b < 0) throw IngestError(t.source, t.lines[r], "negative block index");
    o.blocks.push_back(static_cast<int>(b));
    o.values(static_cast<Eigen::Index>(r)) = t.number(r, cp);
    file_std(static_cast<Eigen::Index>(r)) = t.missing(r, cs) ? 0.0 : t.number(r, cs);
    if (file_std(static_cast<Eigen::Index>(r)) < 0.0) throw IngestError(t.source, t.lines[r], "negative std");
  }
  o.sigma = ObservationSet::base_std(o.values, file_std, std_floor);
  return o;
}

void save_observations(const fs::path& path, const ObservationSet& obs) {
  csv::Writer w(path, {"time", "block", "pobs", "std"});
  for (std::size_t k = 0; k < obs.size(); ++k)
    w.row({csv::fmt(obs.times[k]), std::to_string(obs.blocks[k]), csv::fmt(obs.values(static_cast<Eigen::Index>(k))),
           csv::fmt(obs.sigma(static_cast<Eigen::Index>(k)))});
}

SolverConfig parse_solver(const json& j) {
  SolverConfig c;
  if (j.is_null()) return c;
  const std::string ctx = "solver";
  check_keys(j, {"tol_residual", "tol_update", "max_iters", "damping", "max_dp", "gravity", "flux_unit_constant",
                 "gravity_constant"},
             ctx);
  c.newton_tol_residual = number_or(j, "tol_residual", c.newton_tol_residual, ctx);
  c.newton_tol_update = number_or(j, "tol_update", c.newton_tol_update, ctx);
  c.max_newton_iters = integer_or(j, "max_iters", c.max_newton_iters, ctx);
  c.damping = number_or(j, "damping", c.damping, ctx);
  c.max_dp = number_or(j, "max_dp", c.max_dp, ctx);
  c.gravity_enabled = bool_or(j, "gravity", c.gravity_enabled, ctx);
  c.flux_unit_constant = number_or(j, "flux_unit_constant", c.flux_unit_constant, ctx);
  c.gravity_psi_per_lbm_ft2 = number_or(j, "gravity_constant", c.gravity_psi_per_lbm_ft2, ctx);
  c.validate();
  return c;
}

ForecastConfig parse_forecast_config(const json& j) {
  ForecastConfig c;
  if (j.is_null()) return c;
  check_keys(j, {"kro_floor", "max_halvings"}, "forecast");
  c.kro_floor = number_or(j, "kro_floor", c.kro_floor, "forecast");
  c.max_halvings = integer_or(j, "max_halvings", c.max_halvings, "forecast");
  c.validate();
  return c;
}

EsConfig parse_es(const json& j) {
  EsConfig c;
  if (j.is_null()) return c;
  const std::string ctx = "es";
  check_keys(j, {"n_e", "max_iters", "threshold", "alpha0", "max_retries", "perturb_observations", "restarts",
                 "parallel"},
             ctx);
  c.n_e = integer_or(j, "n_e", c.n_e, ctx);
  c.max_iters = integer_or(j, "max_iters", c.max_iters, ctx);
  c.threshold = number_or(j, "threshold", c.threshold, ctx);
  c.alpha0 = number_or(j, "alpha0", c.alpha0, ctx);
  c.max_retries = integer_or(j, "max_retries", c.max_retries, ctx);
  c.perturb_observations = bool_or(j, "perturb_observations", c.perturb_observations, ctx);
  c.restarts = integer_or(j, "restarts", c.restarts, ctx);
  c.parallel = bool_or(j, "parallel", c.parallel, ctx);
  c.validate();
  return c;
}

ParameterSpace parse_parameters(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("parameters must be a nonempty array");
  std::vector<ParameterSpec> specs;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string ctx = "parameters[" + std::to_string(k) + "]";
    const auto& o = j[k];
    check_keys(o, {"name", "lower", "upper", "transform", "prior", "prior_mean", "prior_std"}, ctx);
    ParameterSpec s;
    const auto& nm = require(o, "name", ctx);
    if (!nm.is_string()) throw ConfigError(ctx + ".name must be a string");
    s.name = nm.get<std::string>();
    s.lower = number(require(o, "lower", ctx), ctx + ".lower");
    s.upper = number(require(o, "upper", ctx), ctx + ".upper");
    const std::string tr = o.value("transform", std::string("log"));
    if (tr == "log") s.transform = Transform::Log;
    else if (tr == "linear") s.transform = Transform::Linear;
    else throw ConfigError(ctx + ".transform must be 'log' or 'linear'");
    const std::string pr = o.value("prior", std::string("uniform"));
    if (pr == "uniform") s.prior = PriorKind::Uniform;
    else if (pr == "truncated_normal") s.prior = PriorKind::TruncatedNormal;
    else throw ConfigError(ctx + ".prior must be 'uniform' or 'truncated_normal'");
    s.prior_mean = number_or(o, "prior_mean", 0.0, ctx);
    s.prior_std = number_or(o, "prior_std", 0.0, ctx);
    specs.push_back(s);
  }
  return ParameterSpace(std::move(specs));
}

json parameters_to_json(const ParameterSpace& space) {
  json a = json::array();
  for (const auto& s : space.specs()) {
    json o{{"name", s.name},
           {"lower", round12(s.lower)},
           {"upper", round12(s.upper)},
           {"transform", s.transform == Transform::Log ? "log" : "linear"},
           {"prior", s.prior == PriorKind::Uniform ? "uniform" : "truncated_normal"}};
    if (s.prior == PriorKind::TruncatedNormal) {
      o["prior_mean"] = round12(s.prior_mean);
      o["prior_std"] = round12(s.prior_std);
    }
    a.push_back(o);
  }
  return a;
}

void write_history_pressures(const fs::path& path, const HistoryResult& r) {
  csv::Writer w(path, {"time", "block", "p", "so", "sg", "sw", "we"});
  for (const auto& rec : r.records)
    for (std::size_t b = 0; b < rec.p.size(); ++b)
      w.row({csv::fmt(rec.time), std::to_string(b), csv::fmt(rec.p[b]), csv::fmt(rec.sat[b].so),
             csv::fmt(rec.sat[b].sg), csv::fmt(rec.sat[b].sw), csv::fmt(rec.we[b])});
}

void write_fluxes(const fs::path& path, const HistoryResult& r, const ReservoirNetwork& net) {
  static const char* kPhase[] = {"oil", "gas", "water"};
  csv::Writer w(path, {"time", "i", "j", "phase", "flux_rb"});
  for (std::size_t n = 1; n < r.records.size(); ++n) {
    const auto& rec = r.records[n];
    for (std::size_t c = 0; c < net.connections().size(); ++c)
      for (int ph = 0; ph < kPhaseCount; ++ph)
        w.row({csv::fmt(rec.time), std::to_string(net.connections()[c].i), std::to_string(net.connections()[c].j),
               kPhase[ph], csv::fmt(rec.step_flux[c][static_cast<std::size_t>(ph)])});
  }
}

void write_forecast(const fs::path& path, const ForecastResult& r) {
  csv::Writer w(path, {"time", "block", "p", "np", "gp", "wp"});
  for (const auto& rec : r.records)
    for (std::size_t b = 0; b < rec.p.size(); ++b)
      w.row({csv::fmt(rec.time), std::to_string(b), csv::fmt(rec.p[b]), csv::fmt(rec.np[b]), csv::fmt(rec.gp[b]),
             csv::fmt(rec.wp[b])});
}

void write_pattern(const fs::path& path, const std::vector<std::pair<int, int>>& pattern) {
  csv::Writer w(path, {"i", "j"});
  for (auto [i, j] : pattern) w.row({std::to_string(i), std::to_string(j)});
}

WellTable load_wells(const fs::path& path, const std::vector<std::string>& numeric,
                     const std::vector<std::string>& categorical) {
  const auto t = csv::read(path);
  if (t.rows.empty()) throw IngestError(t.source, 1, "no wells");
  const std::size_t cw = t.column("well"), cx = t.column("x"), cy = t.column("y");
  std::vector<std::string> num = numeric;
  if (num.empty())
    for (const auto& h : t.header)
      if (h != "well" && std::find(categorical.begin(), categorical.end(), h) == categorical.end()) num.push_back(h);
  std::vector<std::size_t> nc, cc;
  for (const auto& h : num) nc.push_back(t.column(h));
  for (const auto& h : categorical) cc.push_back(t.column(h));

  WellTable out;
  out.coords.resize(static_cast<Eigen::Index>(t.rows.size()), 2);
  std::vector<std::string> wells;
  std::vector<std::vector<double>> rn;
  std::vector<std::vector<std::string>> rc;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& name = t.text(r, cw);
    if (name.empty()) throw IngestError(t.source, t.lines[r], "empty well name");
    if (!seen.insert(name).second) throw IngestError(t.source, t.lines[r], "duplicate well '" + name + "'");
    wells.push_back(name);
    out.coords(static_cast<Eigen::Index>(r), 0) = t.number(r, cx);
    out.coords(static_cast<Eigen::Index>(r), 1) = t.number(r, cy);
    std::vector<double> row;
    for (std::size_t c : nc) row.push_back(t.missing(r, c) ? clustering::kMissing : t.number(r, c));
    rn.push_back(row);
    std::vector<std::string> crow;
    for (std::size_t c : cc) {
      if (t.missing(r, c)) throw IngestError(t.source, t.lines[r], "empty categorical value in '" + t.header[c] + "'");
      crow.push_back(t.text(r, c));
    }
    rc.push_back(crow);
  }
  out.features = clustering::WellFeatureMatrix::build(wells, num, rn, categorical, rc);
  return out;
}

std::map<std::string, clustering::TimeSeries> load_channel(const fs::path& path) {
  const auto t = csv::read(path);
  const std::size_t cw = t.column("well"), ct = t.column("time"), cv = t.column("value");
  std::map<std::string, clustering::TimeSeries> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto& s = out[t.text(r, cw)];
    const double time = t.number(r, ct);
    if (!s.times.empty() && !(time > s.times.back()))
      throw IngestError(t.source, t.lines[r], "times must increase within each well");
    s.times.push_back(time);
    s.values.push_back(t.number(r, cv));
  }
  if (out.empty()) throw IngestError(t.source, 1, "no series");
  return out;
}

}  // namespace matnet::io

#include "matnet/history_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "matnet/error.hpp"
#include "matnet/kernels.hpp"
#include "matnet/rng.hpp"

namespace matnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

std::size_t parse_index(const std::string& text, const std::string& name) {
  std::size_t pos = 0;
  long v = -1;
  try {
    v = std::stol(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v < 0) throw ConfigError("parameter '" + name + "': bad index '" + text + "'");
  return static_cast<std::size_t>(v);
}

double forward_transform(Transform t, double v) { return t == Transform::Log ? std::log(v) : v; }
double inverse_transform(Transform t, double v) { return t == Transform::Log ? std::exp(v) : v; }

}  // namespace

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> specs) : specs_(std::move(specs)) { validate(); }

std::size_t ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < specs_.size(); ++k)
    if (specs_[k].name == name) return k;
  throw ConfigError("unknown parameter '" + name + "'");
}

double ParameterSpace::lower_internal(std::size_t k) const {
  return forward_transform(specs_[k].transform, specs_[k].lower);
}
double ParameterSpace::upper_internal(std::size_t k) const {
  return forward_transform(specs_[k].transform, specs_[k].upper);
}

Eigen::VectorXd ParameterSpace::to_internal(const Eigen::VectorXd& physical) const {
  Eigen::VectorXd m(physical.size());
  for (Eigen::Index k = 0; k < m.size(); ++k)
    m(k) = forward_transform(specs_[static_cast<std::size_t>(k)].transform, physical(k));
  return m;
}

Eigen::VectorXd ParameterSpace::to_physical(const Eigen::VectorXd& internal) const {
  Eigen::VectorXd m(internal.size());
  for (Eigen::Index k = 0; k < m.size(); ++k)
    m(k) = inverse_transform(specs_[static_cast<std::size_t>(k)].transform, internal(k));
  return m;
}

int ParameterSpace::clip(Eigen::Ref<Eigen::VectorXd> internal) const {
  int clipped = 0;
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double lo = lower_internal(k), hi = upper_internal(k);
    if (!(internal(i) >= lo)) {
      internal(i) = lo;
      ++clipped;
    } else if (internal(i) > hi) {
      internal(i) = hi;
      ++clipped;
    }
  }
  return clipped;
}

void ParameterSpace::validate() const {
  if (specs_.empty()) throw ConfigError("parameter space is empty");
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const auto& s = specs_[k];
    if (!std::isfinite(s.lower) || !std::isfinite(s.upper) || !(s.lower < s.upper))
      throw ConfigError("parameter '" + s.name + "': bounds must be finite with lower < upper");
    if (s.transform == Transform::Log && !(s.lower > 0.0))
      throw ConfigError("parameter '" + s.name + "': log transform needs a positive lower bound");
    if (s.prior == PriorKind::TruncatedNormal && !(s.prior_std > 0.0))
      throw ConfigError("parameter '" + s.name + "': truncated-normal prior needs a positive std");
    for (std::size_t q = 0; q < k; ++q)
      if (specs_[q].name == s.name) throw ConfigError("duplicate parameter '" + s.name + "'");
  }
}

void ObservationSet::validate(std::size_t n_blocks) const {
  const auto n = static_cast<Eigen::Index>(times.size());
  if (n == 0) throw ConfigError("observations: empty set");
  if (static_cast<Eigen::Index>(blocks.size()) != n || values.size() != n || sigma.size() != n)
    throw ConfigError("observations: field lengths differ");
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto b = blocks[static_cast<std::size_t>(k)];
    if (b < 0 || static_cast<std::size_t>(b) >= n_blocks)
      throw ConfigError("observations: block " + std::to_string(b) + " out of range");
    if (!std::isfinite(values(k))) throw ConfigError("observations: non-finite pressure");
    if (!(sigma(k) > 0.0)) throw ConfigError("observations: measurement std must be positive");
  }
}

Eigen::VectorXd ObservationSet::base_std(const Eigen::VectorXd& values, const Eigen::VectorXd& file_std,
                                         double floor) {
  const double fallback = std::max(0.01 * values.cwiseAbs().maxCoeff(), floor);
  Eigen::VectorXd s = file_std;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (!(s(k) > 0.0)) s(k) = fallback;
  return s;
}

void HistoryMatchProblem::validate() const {
  base.validate();
  schedule.validate(base.size());
  solver.validate();
  space.validate();
  observations.validate(base.size());
  const double t_end = schedule.times.back();
  for (double t : observations.times)
    if (t < 0.0 || t > t_end * (1.0 + 1e-12)) throw ConfigError("observations: time outside the schedule");
  Eigen::VectorXd mid(static_cast<Eigen::Index>(space.size()));
  for (std::size_t k = 0; k < space.size(); ++k)
    mid(static_cast<Eigen::Index>(k)) = 0.5 * (space.lower_internal(k) + space.upper_internal(k));
  bind_parameters(base, space, space.to_physical(mid));
}

ReservoirNetwork bind_parameters(const ReservoirNetwork& base, const ParameterSpace& space,
                                 const Eigen::VectorXd& physical) {
  if (static_cast<std::size_t>(physical.size()) != space.size()) throw ConfigError("parameter vector size mismatch");
  std::vector<Block> blocks = base.blocks();
  std::vector<Connection> conns = base.connections();
  double t_max = base.t_max();
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto& name = space.specs()[k].name;
    const double v = physical(static_cast<Eigen::Index>(k));
    const auto parts = split(name, ':');
    auto block_at = [&](const std::string& idx) -> Block& {
      const std::size_t b = parse_index(idx, name);
      if (b >= blocks.size()) throw ConfigError("parameter '" + name + "': block out of range");
      return blocks[b];
    };
    if (parts.size() == 2 && parts[0] == "ooip") {
      block_at(parts[1]).n_foi = v;
    } else if (parts.size() == 2 && (parts[0] == "wei" || parts[0] == "j")) {
      Block& b = block_at(parts[1]);
      if (!b.aquifer) throw ConfigError("parameter '" + name + "': block has no aquifer");
      (parts[0] == "wei" ? b.aquifer->wei : b.aquifer->j) = v;
    } else if (parts.size() == 1 && parts[0] == "tmax") {
      t_max = v;
    } else if (parts.size() == 3 && parts[0] == "tij") {
      std::size_t a = parse_index(parts[1], name), b = parse_index(parts[2], name);
      if (a > b) std::swap(a, b);
      auto it = std::find_if(conns.begin(), conns.end(), [&](const Connection& c) {
        return static_cast<std::size_t>(c.i) == a && static_cast<std::size_t>(c.j) == b;
      });
      if (it == conns.end()) throw ConfigError("parameter '" + name + "': blocks are not connected");
      it->t = v;
    } else {
      throw ConfigError("parameter '" + name + "': unrecognized name");
    }
  }
  for (auto& c : conns) c.t = std::clamp(c.t, 0.0, t_max);
  return ReservoirNetwork(std::move(blocks), std::move(conns), t_max);
}

Eigen::VectorXd sample_observations(const HistoryResult& result, const ObservationSet& obs) {
  const auto& rec = result.records;
  Eigen::VectorXd d(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const double t = obs.times[k];
    const auto b = static_cast<std::size_t>(obs.blocks[k]);
    auto it = std::lower_bound(rec.begin(), rec.end(), t,
                               [](const HistoryRecord& r, double tt) { return r.time < tt; });
    double v;
    if (it == rec.end()) {
      v = rec.back().p[b];
    } else if (std::abs(it->time - t) <= 1e-9 * std::max(1.0, std::abs(t)) || it == rec.begin()) {
      v = it->p[b];
    } else {
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (t - lo.time) / (hi.time - lo.time);
      v = lo.p[b] + w * (hi.p[b] - lo.p[b]);
    }
    d(static_cast<Eigen::Index>(k)) = v;
  }
  return d;
}

ForwardResult forward(const HistoryMatchProblem& problem, const Eigen::VectorXd& internal) {
  ForwardResult r;
  try {
    const auto net = bind_parameters(problem.base, problem.space, problem.space.to_physical(internal));
    const auto hist = run_history(net, problem.schedule, problem.solver);
    r.data = sample_observations(hist, problem.observations);
    r.ok = r.data.allFinite();
    if (!r.ok) r.error = "non-finite prediction";
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

double objective(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed) {
  return (predicted - observed).squaredNorm() / static_cast<double>(observed.size());
}

Eigen::VectorXd cauchy_reweight(const Eigen::VectorXd& r) {
  return (1.0 + r.array().square()).inverse().matrix();
}

Eigen::VectorXd standardized_residual(const Eigen::VectorXd& observed, const Eigen::VectorXd& mean_prediction) {
  const Eigen::VectorXd res = observed - mean_prediction;
  auto median = [](std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::vector<double> v(res.data(), res.data() + res.size());
  const double med = median(v);
  for (double& x : v) x = std::abs(x - med);
  const double scale = 1.4826 * median(v);
  if (!(scale > 0.0)) {
    const double rms = std::sqrt(res.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, res.size())));
    return rms > 0.0 ? Eigen::VectorXd(res / rms) : Eigen::VectorXd::Zero(res.size());
  }
  return res / scale;
}

Eigen::MatrixXd es_rlm_update(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g, const Eigen::MatrixXd& d,
                              const Eigen::VectorXd& cd, double alpha) {
  const Eigen::Index ne = m.cols(), nd = g.rows();
  if (ne < 2) throw ConfigError("ES update needs at least two members");
  if (g.cols() != ne || d.cols() != ne || d.rows() != nd || cd.size() != nd)
    throw ConfigError("ES update: dimension mismatch");
  if (!(alpha >= 0.0)) throw ConfigError("ES update: alpha must be non-negative");

  const Eigen::VectorXd m_mean = m.rowwise().mean();
  const Eigen::VectorXd g_mean = g.rowwise().mean();
  const Eigen::MatrixXd dm = m.colwise() - m_mean;
  const Eigen::MatrixXd dg = g.colwise() - g_mean;
  const double inv = 1.0 / static_cast<double>(ne - 1);
  const Eigen::MatrixXd c_md = inv * dm * dg.transpose();
  Eigen::MatrixXd a = inv * dg * dg.transpose();
  a.diagonal() += alpha * cd;
  const Eigen::MatrixXd rhs = d - g;

  const double scale = std::max(a.trace() / static_cast<double>(nd), std::numeric_limits<double>::min());
  double jitter = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::MatrixXd aj = a;
    aj.diagonal().array() += jitter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(aj);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-13) {
      const Eigen::MatrixXd x = ldlt.solve(rhs);
      if (x.allFinite()) return m + c_md * x;
    }
    jitter = jitter == 0.0 ? 1e-10 * scale : jitter * 100.0;
  }
  throw LinearSolveError("ES update: C_DD + alpha C_D is singular even after jitter");
}

void EsConfig::validate() const {
  if (n_e < 2) throw ConfigError("ensemble size must be at least 2");
  if (max_iters < 0) throw ConfigError("max_iters must be non-negative");
  if (!(threshold > 0.0)) throw ConfigError("termination threshold must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
}

BoxStats box_stats(std::vector<double> v) {
  if (v.empty()) return {kNaN, kNaN, kNaN, kNaN, kNaN};
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {v.front(), q(0.25), q(0.5), q(0.75), v.back()};
}

Eigen::MatrixXd sample_prior(const ParameterSpace& space, int n_e, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(space.size()), n_e);
  for (int j = 0; j < n_e; ++j)
    for (std::size_t k = 0; k < space.size(); ++k) {
      const auto& s = space.specs()[k];
      const double lo = space.lower_internal(k), hi = space.upper_internal(k);
      double v;
      if (s.prior == PriorKind::Uniform) {
        v = rng.uniform(lo, hi);
      } else {
        int tries = 0;
        do {
          v = s.prior_mean + s.prior_std * rng.normal();
        } while ((v < lo || v > hi) && ++tries < 10000);
        v = std::clamp(v, lo, hi);
      }
      m(static_cast<Eigen::Index>(k), j) = v;
    }
  return m;
}

namespace {

struct Evaluation {
  std::vector<ForwardResult> runs;
  std::vector<double> objectives;
  std::vector<Eigen::Index> ok;
  double mean = kNaN;
};

Evaluation evaluate(const HistoryMatchProblem& problem, const Eigen::MatrixXd& m, bool parallel) {
  Evaluation e;
  e.runs = parallel ? kernels::forward_ensemble_parallel(problem, m) : kernels::forward_ensemble_serial(problem, m);
  e.objectives.assign(e.runs.size(), kNaN);
  double sum = 0.0;
  for (std::size_t j = 0; j < e.runs.size(); ++j) {
    if (!e.runs[j].ok) continue;
    e.objectives[j] = objective(e.runs[j].data, problem.observations.values);
    sum += e.objectives[j];
    e.ok.push_back(static_cast<Eigen::Index>(j));
  }
  if (!e.ok.empty()) e.mean = sum / static_cast<double>(e.ok.size());
  return e;
}

IterationRecord record(const ParameterSpace& space, int it, double alpha, const Eigen::MatrixXd& m,
                       const Evaluation& e, int retries) {
  IterationRecord r;
  r.iteration = it;
  r.alpha = alpha;
  r.objective_mean = e.mean;
  r.failed = static_cast<int>(e.runs.size() - e.ok.size());
  r.retries = retries;
  r.objectives = e.objectives;
  r.physical.resize(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) r.physical.col(j) = space.to_physical(m.col(j));
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    std::vector<double> v;
    for (Eigen::Index j : e.ok) v.push_back(r.physical(k, j));
    r.params.push_back(box_stats(v));
  }
  return r;
}

}  // namespace

HistoryMatchResult run_history_match(const HistoryMatchProblem& problem, const EsConfig& cfg,
                                     const std::optional<Eigen::MatrixXd>& initial) {
  cfg.validate();
  const auto& space = problem.space;
  const auto& obs = problem.observations;
  const auto nm = static_cast<Eigen::Index>(space.size());
  const auto nd = static_cast<Eigen::Index>(obs.size());

  HistoryMatchResult res;
  res.seed = cfg.seed;
  Eigen::MatrixXd m;
  if (initial) {
    if (initial->rows() != nm || initial->cols() != cfg.n_e)
      throw ConfigError("initial ensemble must be n_params x n_e");
    m = *initial;
  } else {
    m = sample_prior(space, cfg.n_e, cfg.seed);
  }
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (space.clip(m.col(j)) > 0) res.log.push_back("member " + std::to_string(j) + " clipped to bounds");

  Rng noise(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Evaluation cur = evaluate(problem, m, cfg.parallel);
  if (cur.ok.empty()) throw NonconvergenceError("history match: every prior member failed", 0, kNaN, {});
  const Eigen::VectorXd base_cd = obs.sigma.array().square();
  double alpha = cfg.alpha0;
  res.iterations.push_back(record(space, 0, alpha, m, cur, 0));

  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (cur.ok.size() < 2) {
      res.stop_reason = "fewer than two successful members";
      break;
    }
    const auto n_ok = static_cast<Eigen::Index>(cur.ok.size());
    Eigen::MatrixXd m_ok(nm, n_ok), g_ok(nd, n_ok);
    for (Eigen::Index q = 0; q < n_ok; ++q) {
      m_ok.col(q) = m.col(cur.ok[static_cast<std::size_t>(q)]);
      g_ok.col(q) = cur.runs[static_cast<std::size_t>(cur.ok[static_cast<std::size_t>(q)])].data;
    }
    if (cur.ok.size() < cur.runs.size())
      res.log.push_back("iteration " + std::to_string(it) + ": " +
                        std::to_string(cur.runs.size() - cur.ok.size()) + " failed members excluded");

    const Eigen::VectorXd w = cauchy_reweight(standardized_residual(obs.values, g_ok.rowwise().mean()));
    const Eigen::VectorXd cd = base_cd.cwiseQuotient(w);

    Eigen::MatrixXd d(nd, m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index k = 0; k < nd; ++k)
        d(k, j) = obs.values(k) + (cfg.perturb_observations ? obs.sigma(k) * noise.normal() : 0.0);
    Eigen::MatrixXd d_ok(nd, n_ok);
    for (Eigen::Index q = 0; q < n_ok; ++q) d_ok.col(q) = d.col(cur.ok[static_cast<std::size_t>(q)]);

    if (!(alpha > 0.0)) {
      const Eigen::MatrixXd dg = g_ok.colwise() - g_ok.rowwise().mean();
      alpha = (dg * dg.transpose()).trace() / static_cast<double>(n_ok - 1) / base_cd.sum();
      if (!(alpha > 0.0)) alpha = 1.0;
    }

    bool accepted = false;
    int retries = 0;
    Eigen::MatrixXd m_new;
    Evaluation next;
    for (; retries <= cfg.max_retries; ++retries) {
      const Eigen::MatrixXd upd = es_rlm_update(m_ok, g_ok, d_ok, cd, alpha);
      m_new = m;
      int clipped = 0;
      for (Eigen::Index q = 0; q < n_ok; ++q) {
        const Eigen::Index j = cur.ok[static_cast<std::size_t>(q)];
        m_new.col(j) = upd.col(q);
        clipped += space.clip(m_new.col(j));
      }
      if (clipped > 0)
        res.log.push_back("iteration " + std::to_string(it) + ": " + std::to_string(clipped) +
                          " parameter values clipped to bounds");
      next = evaluate(problem, m_new, cfg.parallel);
      if (!next.ok.empty() && next.mean < cur.mean) {
        accepted = true;
        break;
      }
      alpha *= 10.0;
    }
    if (!accepted) {
      res.stop_reason = "no improving update after " + std::to_string(cfg.max_retries) + " retries";
      break;
    }

    const double rel_obj = std::abs(cur.mean - next.mean) / std::max(cur.mean, std::numeric_limits<double>::min());
    double rel_par = 0.0;
    const Eigen::VectorXd mean_old = m.rowwise().mean(), mean_new = m_new.rowwise().mean();
    for (Eigen::Index k = 0; k < nm; ++k) {
      const auto q = static_cast<std::size_t>(k);
      rel_par = std::max(rel_par, std::abs(mean_new(k) - mean_old(k)) /
                                      (space.upper_internal(q) - space.lower_internal(q)));
    }
    m = std::move(m_new);
    cur = std::move(next);
    res.iterations.push_back(record(space, it, alpha, m, cur, retries));
    alpha *= 0.1;
    if (rel_obj < cfg.threshold && rel_par < cfg.threshold) {
      res.converged = true;
      res.stop_reason = "objective and parameter changes below threshold";
      break;
    }
  }
  if (res.stop_reason.empty()) res.stop_reason = "iteration limit reached";
  return res;
}

std::vector<HistoryMatchResult> run_history_match_restarts(const HistoryMatchProblem& problem, const EsConfig& cfg) {
  cfg.validate();
  std::vector<HistoryMatchResult> out;
  for (int r = 0; r < cfg.restarts; ++r) {
    EsConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
    out.push_back(run_history_match(problem, c));
  }
  return out;
}

}  // namespace matnet

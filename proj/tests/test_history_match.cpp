#include "doctest.h"

#include <cmath>

#include "matnet/error.hpp"
#include "matnet/history_match.hpp"
#include "matnet/synthetic.hpp"
#include "support.hpp"

using namespace matnet;

namespace {
const SyntheticCase& quiet_twin() {
  static const SyntheticCase c = [] {
    SyntheticSpec s;
    s.noise_std = 0.0;
    s.n_steps = 24;
    return make_synthetic(s);
  }();
  return c;
}
}  // namespace

TEST_CASE("Cauchy weights") {
  Eigen::VectorXd r(3);
  r << 0.0, 1.0, 3.0;
  const auto w = cauchy_reweight(r);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 0.5);
  CHECK(w[2] == doctest::Approx(0.1).epsilon(1e-15));
  Rng rng(1);
  Eigen::VectorXd big(200);
  for (auto& v : big) v = rng.uniform(-1e3, 1e3);
  const auto wb = cauchy_reweight(big);
  for (Eigen::Index k = 0; k < big.size(); ++k) {
    CHECK(wb[k] > 0.0);
    CHECK(wb[k] < 1.0);
  }
}

TEST_CASE("standardized residual uses the scaled median absolute deviation") {
  Eigen::VectorXd obs(5), pred = Eigen::VectorXd::Zero(5);
  obs << 1.0, -2.0, 3.0, 0.5, -1.0;
  // Median 0.5; absolute deviations 0.5 2.5 2.5 1.5 1.5 -> MAD 1.5.
  const auto r = standardized_residual(obs, pred);
  for (int k = 0; k < 5; ++k) CHECK(r[k] == doctest::Approx(obs[k] / (1.4826 * 1.5)));
}

TEST_CASE("very large damping leaves the ensemble in place") {
  Rng rng(2);
  const int nm = 4, nd = 6, ne = 20;
  Eigen::MatrixXd m(nm, ne), g(nd, ne), d(nd, ne);
  for (int j = 0; j < ne; ++j) {
    for (int c = 0; c < nm; ++c) m(c, j) = rng.uniform(0.0, 1.0);
    for (int r = 0; r < nd; ++r) {
      g(r, j) = rng.uniform(0.0, 10.0);
      d(r, j) = rng.uniform(0.0, 10.0);
    }
  }
  const auto out = es_rlm_update(m, g, d, Eigen::VectorXd::Ones(nd), 1e12);
  CHECK((out - m).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("an ensemble of identical members does not move") {
  const int nm = 3, nd = 5, ne = 10;
  Eigen::VectorXd m0(nm), g0(nd);
  m0 << 1.0, 2.0, 3.0;
  g0 << 4.0, 5.0, 6.0, 7.0, 8.0;
  const Eigen::MatrixXd m = m0.replicate(1, ne), g = g0.replicate(1, ne);
  const Eigen::MatrixXd d = Eigen::MatrixXd::Constant(nd, ne, 3.0);
  const auto out = es_rlm_update(m, g, d, Eigen::VectorXd::Ones(nd), 1.0);
  CHECK(out == m);
}

TEST_CASE("linear-Gaussian update agrees with the normal equations") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(testsupport::linear_gaussian_trial(seed) < 3.0);
}

TEST_CASE("update rejects malformed input") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 1), g = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(es_rlm_update(m, g, g, Eigen::VectorXd::Ones(3), 1.0), ConfigError);
  const Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(2, 4), g2 = Eigen::MatrixXd::Zero(3, 4);
  CHECK_THROWS_AS(es_rlm_update(m2, g2, g2, Eigen::VectorXd::Ones(3), -1.0), ConfigError);
}

TEST_CASE("parameter space transforms and validation") {
  ParameterSpace s({{"ooip:0", 1e6, 1e8, Transform::Log}, {"tmax", 10.0, 20.0, Transform::Linear}});
  CHECK(s.index_of("tmax") == 1);
  CHECK_THROWS_AS(s.index_of("nope"), ConfigError);
  Eigen::VectorXd phys(2);
  phys << 3e6, 12.5;
  const auto back = s.to_physical(s.to_internal(phys));
  CHECK(back[0] == doctest::Approx(3e6).epsilon(1e-14));
  CHECK(back[1] == doctest::Approx(12.5).epsilon(1e-14));
  CHECK(s.lower_internal(0) == doctest::Approx(std::log(1e6)));
  Eigen::VectorXd internal(2);
  internal << 100.0, 5.0;
  CHECK(s.clip(internal) == 2);
  CHECK(internal[0] == s.upper_internal(0));
  CHECK(internal[1] == 10.0);

  CHECK_THROWS_AS(ParameterSpace({{"ooip:0", 5.0, 1.0, Transform::Linear}}), ConfigError);
  CHECK_THROWS_AS(ParameterSpace({{"ooip:0", 0.0, 1.0, Transform::Log}}), ConfigError);
  CHECK_THROWS_AS(ParameterSpace({{"ooip:0", 1.0, 2.0}, {"ooip:0", 1.0, 2.0}}), ConfigError);
  CHECK_THROWS_AS(ParameterSpace(std::vector<ParameterSpec>{}), ConfigError);
}

TEST_CASE("prior draws stay inside the bounds") {
  ParameterSpace s({{"a", 1.0, 10.0, Transform::Log},
                    {"b", -1.0, 1.0, Transform::Linear, PriorKind::TruncatedNormal, 0.5, 2.0}});
  const auto m = sample_prior(s, 500, 3);
  for (int j = 0; j < 500; ++j)
    for (int k = 0; k < 2; ++k) {
      CHECK(m(k, j) >= s.lower_internal(k));
      CHECK(m(k, j) <= s.upper_internal(k));
    }
  CHECK(sample_prior(s, 10, 9) == sample_prior(s, 10, 9));
}

TEST_CASE("base std falls back to one percent of the largest observation") {
  Eigen::VectorXd v(3), file(3);
  v << 3000.0, -4000.0, 2000.0;
  file << 2.0, 0.0, -1.0;
  const auto s = ObservationSet::base_std(v, file, 10.0);
  CHECK(s[0] == 2.0);
  CHECK(s[1] == 40.0);
  CHECK(ObservationSet::base_std(v, file, 60.0)[2] == 60.0);
}

TEST_CASE("box statistics") {
  const auto b = box_stats({5.0, 1.0, 3.0, 2.0, 4.0});
  CHECK(b.min == 1.0);
  CHECK(b.q1 == 2.0);
  CHECK(b.median == 3.0);
  CHECK(b.q3 == 4.0);
  CHECK(b.max == 5.0);
  CHECK(box_stats({1.0, 2.0}).median == 1.5);
}

TEST_CASE("forward model at the truth reproduces noise-free observations") {
  const auto& c = quiet_twin();
  const auto problem = c.problem();
  const auto r = forward(problem, c.space.to_internal(c.truth));
  REQUIRE(r.ok);
  // Observations carry 12 significant digits and the log transform round
  // trip perturbs parameters in the last bits.
  for (Eigen::Index k = 0; k < r.data.size(); ++k)
    CHECK(r.data[k] == doctest::Approx(c.observations.values[k]).epsilon(1e-9));
  const auto again = forward(problem, c.space.to_internal(c.truth));
  CHECK(again.data == r.data);
  CHECK(objective(r.data, c.observations.values) < 1e-12);
}

TEST_CASE("doubling one block's oil in place raises its terminal pressure") {
  const auto& c = quiet_twin();
  const auto problem = c.problem();
  Eigen::VectorXd phys = c.truth;
  const auto k = c.space.index_of("ooip:0");
  std::vector<ParameterSpec> specs = c.space.specs();
  specs[k].upper = 4.0 * c.truth[k];
  auto p2 = problem;
  p2.space = ParameterSpace(specs);
  const auto base = forward(p2, p2.space.to_internal(phys));
  phys[k] *= 2.0;
  const auto doubled = forward(p2, p2.space.to_internal(phys));
  REQUIRE(base.ok);
  REQUIRE(doubled.ok);
  const auto& obs = c.observations;
  Eigen::Index last = -1;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(obs.size()); ++i)
    if (obs.blocks[i] == 0) last = i;
  CHECK(doubled.data[last] > base.data[last]);
}

TEST_CASE("the truth member of a noise-free twin stays at negligible mismatch") {
  const auto& c = quiet_twin();
  const auto problem = c.problem();
  EsConfig cfg;
  cfg.n_e = 8;
  cfg.max_iters = 2;
  cfg.perturb_observations = false;
  cfg.seed = 4;
  Eigen::MatrixXd init = sample_prior(c.space, cfg.n_e, 4);
  init.col(0) = c.space.to_internal(c.truth);
  const auto res = run_history_match(problem, cfg, init);
  for (const auto& it : res.iterations) CHECK(it.objectives[0] < 1e-12);
  CHECK(res.final_iteration().physical.col(0).isApprox(c.truth, 1e-8));
}

TEST_CASE("ensemble size and threshold validation") {
  EsConfig cfg;
  cfg.n_e = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.n_e = 50;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_e = 100;
  CHECK_NOTHROW(cfg.validate());
  cfg.threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("history match is deterministic for a seed") {
  const auto& c = quiet_twin();
  EsConfig cfg;
  cfg.n_e = 6;
  cfg.max_iters = 1;
  cfg.seed = 11;
  const auto a = run_history_match(c.problem(), cfg), b = run_history_match(c.problem(), cfg);
  CHECK(a.final_iteration().physical == b.final_iteration().physical);
  cfg.parallel = false;
  const auto s = run_history_match(c.problem(), cfg);
  CHECK(a.final_iteration().physical == s.final_iteration().physical);
}

TEST_CASE("parameter binding rejects unknown or unusable names") {
  const auto& c = quiet_twin();
  Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 2.0);
  CHECK_THROWS_AS(bind_parameters(c.network, ParameterSpace({{"wei:0", 1.0, 3.0}}), one), ConfigError);
  CHECK_THROWS_AS(bind_parameters(c.network, ParameterSpace({{"tij:0:3", 1.0, 3.0}}), one), ConfigError);
  CHECK_THROWS_AS(bind_parameters(c.network, ParameterSpace({{"porosity", 1.0, 3.0}}), one), ConfigError);
  const auto net = bind_parameters(c.network, ParameterSpace({{"tmax", 1.0, 3.0}}), one);
  CHECK(net.t_max() == 2.0);
  for (const auto& conn : net.connections()) CHECK(conn.t <= 2.0);
}

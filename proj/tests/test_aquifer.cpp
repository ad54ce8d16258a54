#include "doctest.h"

#include <cmath>
#include <vector>

#include "matnet/aquifer.hpp"
#include "matnet/error.hpp"
#include "matnet/rng.hpp"

using namespace matnet;

namespace {
const AquiferParams kRef{1e8, 50.0, 4000.0};

// Recursion with the step-average pressure replaced by the step-end pressure.
double endpoint_recursion(const AquiferParams& a, const std::vector<double>& p, const std::vector<double>& dt,
                          std::size_t n) {
  double we = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = 1.0 - std::exp(-a.j * a.p_init * dt[k] / a.wei);
    we = we + (a.wei / a.p_init) * (a.p_init * (1.0 - we / a.wei) - p[k]) * f;
  }
  return we;
}
}  // namespace

TEST_CASE("recursive step with no drawdown and no prior influx is zero") {
  CHECK(aquifer::step_recursive(kRef, 0.0, 4000.0, 4000.0, 30.0) == 0.0);
}

TEST_CASE("zero productivity index leaves the influx unchanged") {
  const AquiferParams a{1e8, 0.0, 4000.0};
  CHECK(aquifer::step_recursive(a, 1234.5, 3500.0, 3000.0, 30.0) == 1234.5);
}

TEST_CASE("constant-pressure path: closed form equals the endpoint recursion") {
  const std::vector<double> p(10, 3000.0), dt(10, 30.0);
  for (std::size_t n = 1; n <= 10; ++n) {
    const double ref = endpoint_recursion(kRef, p, dt, n);
    CHECK(aquifer::closed_form(kRef, p, dt, n) == doctest::Approx(ref).epsilon(1e-12));
    double rec = 0.0;
    for (std::size_t k = 0; k < n; ++k) rec = aquifer::step_recursive(kRef, rec, p[k], p[k], dt[k]);
    CHECK(rec == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("closed form of an undisturbed path is zero") {
  const std::vector<double> p(5, 4000.0), dt(5, 30.0);
  CHECK(aquifer::closed_form(kRef, p, dt, 5) == 0.0);
}

TEST_CASE("single step closed form") {
  const std::vector<double> p{3900.0}, dt{30.0};
  const double expected = 2.5e4 * (1.0 - std::exp(-0.06)) * 100.0;
  CHECK(aquifer::closed_form(kRef, p, dt, 1) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(aquifer::step_recursive(kRef, 0.0, 3900.0, 3900.0, 30.0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("closed form rejects an index beyond the history") {
  const std::vector<double> p{3900.0}, dt{30.0};
  CHECK_THROWS_AS(aquifer::closed_form(kRef, p, dt, 2), Error);
}

TEST_CASE("derivative: zero ahead of the step, undamped at the step") {
  const std::vector<double> dt{30.0, 20.0, 10.0};
  CHECK(aquifer::dwe_dp(kRef, dt, 1, 2) == 0.0);
  CHECK(aquifer::dwe_dp(kRef, dt, 2, 3) == 0.0);
  const double at_step = -(kRef.wei / kRef.p_init) * (1.0 - std::exp(-kRef.j * kRef.p_init * 20.0 / kRef.wei));
  CHECK(aquifer::dwe_dp(kRef, dt, 2, 2) == doctest::Approx(at_step).epsilon(1e-14));
}

TEST_CASE("random paths: equivalence, bounds, derivative sign and finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const AquiferParams a{rng.uniform(1e6, 1e9), rng.uniform(0.1, 100.0), rng.uniform(2000.0, 6000.0)};
    const std::size_t n = 200;
    std::vector<double> p(n), dt(n);
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = a.p_init - rng.uniform(0.0, 0.9 * a.p_init);
      dt[k] = rng.uniform(1.0, 60.0);
    }
    double rec = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double f = 1.0 - std::exp(-a.j * a.p_init * dt[k - 1] / a.wei);
      rec += (a.wei / a.p_init) * (a.p_init * (1.0 - rec / a.wei) - p[k - 1]) * f;
      const double cf = aquifer::closed_form(a, p, dt, k);
      CHECK(std::abs(cf - rec) <= 1e-10 * std::abs(rec));
      CHECK(cf >= 0.0);
      CHECK(cf <= a.wei);
    }
    for (int s = 0; s < 20; ++s) {
      const std::size_t k = 1 + rng.index(n);
      const std::size_t j = std::max<std::size_t>(1, k - std::min<std::size_t>(k - 1, rng.index(30)));
      const double d = aquifer::dwe_dp(a, dt, k, j);
      CHECK(d <= 0.0);
      // closed_form is affine in p_j, so the step size only sets round-off.
      const double h = 10.0;
      auto pp = p, pm = p;
      pp[j - 1] += h;
      pm[j - 1] -= h;
      const double fd = (aquifer::closed_form(a, pp, dt, k) - aquifer::closed_form(a, pm, dt, k)) / (2 * h);
      CHECK(std::abs(fd - d) <= 1e-8 * std::abs(d));
    }
  }
}

TEST_CASE("tracker influx grows with current drawdown") {
  AquiferTracker t(kRef);
  t.commit(3900.0, 30.0);
  t.commit(3800.0, 30.0);
  CHECK(t.influx(3500.0, 30.0) > t.influx(3700.0, 30.0));
  const std::vector<double> p{3900.0, 3800.0, 3600.0}, dt{30.0, 30.0, 30.0};
  CHECK(t.influx(3600.0, 30.0) == doctest::Approx(aquifer::closed_form(kRef, p, dt, 3)).epsilon(1e-14));
  CHECK(t.dinflux_dp(30.0) == doctest::Approx(aquifer::dwe_dp(kRef, dt, 3, 3)).epsilon(1e-14));
}

TEST_CASE("aquifer parameter validation") {
  CHECK_THROWS_AS((AquiferParams{0.0, 1.0, 4000.0}.validate()), ConfigError);
  CHECK_THROWS_AS((AquiferParams{1e6, -1.0, 4000.0}.validate()), ConfigError);
  CHECK_THROWS_AS(AquiferParams::from_volume(1e9, 400.0, 1e-5, 4000.0, 1.0), ConfigError);
  const auto a = AquiferParams::from_volume(1e9, 180.0, 1e-5, 4000.0, 1.0);
  CHECK(a.wei == doctest::Approx(1e-5 * 1e9 * 4000.0 * 0.5));
}

#include "doctest.h"

#include "matnet/kernels.hpp"
#include "matnet/rng.hpp"
#include "matnet/synthetic.hpp"

using namespace matnet;

TEST_CASE("parallel pairwise DTW equals the serial reference bitwise") {
  Rng rng(4);
  std::vector<clustering::WellSeries> wells(17);
  for (std::size_t w = 0; w < wells.size(); ++w) {
    wells[w].well = "w" + std::to_string(w);
    for (int ch = 0; ch < 2; ++ch) {
      clustering::TimeSeries s;
      for (int t = 0; t < 25; ++t) {
        s.times.push_back(t);
        s.values.push_back(rng.uniform());
      }
      wells[w].channels.push_back(s);
    }
  }
  const auto a = kernels::pairwise_distances_serial(wells, {});
  const auto b = kernels::pairwise_distances_parallel(wells, {});
  CHECK(a == b);
  CHECK(a == a.transpose());
  CHECK(a.diagonal().isZero(0.0));
}

TEST_CASE("parallel ensemble forward runs equal the serial reference bitwise") {
  SyntheticSpec s;
  s.n_steps = 12;
  const auto c = make_synthetic(s);
  const auto problem = c.problem();
  const auto m = sample_prior(c.space, 6, 3);
  const auto a = kernels::forward_ensemble_serial(problem, m);
  const auto b = kernels::forward_ensemble_parallel(problem, m);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].ok == b[j].ok);
    CHECK(a[j].data == b[j].data);
  }
}

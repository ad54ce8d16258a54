// Serial reference vs OpenMP kernels: pairwise DTW distances and ensemble
// forward runs.

#include <benchmark/benchmark.h>

#include "matnet/kernels.hpp"
#include "matnet/rng.hpp"
#include "matnet/synthetic.hpp"

namespace {

using namespace matnet;

std::vector<clustering::WellSeries> random_wells(int n, int len) {
  Rng rng(7);
  std::vector<clustering::WellSeries> w(static_cast<std::size_t>(n));
  for (auto& s : w) {
    clustering::TimeSeries ts;
    double v = 0.0;
    for (int t = 0; t < len; ++t) {
      v += rng.normal();
      ts.times.push_back(t);
      ts.values.push_back(v);
    }
    s.channels.push_back(ts);
  }
  return w;
}

void BM_PairwiseDtwSerial(benchmark::State& st) {
  const auto w = random_wells(static_cast<int>(st.range(0)), 120);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_distances_serial(w, {}));
}
void BM_PairwiseDtwParallel(benchmark::State& st) {
  const auto w = random_wells(static_cast<int>(st.range(0)), 120);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_distances_parallel(w, {}));
}
BENCHMARK(BM_PairwiseDtwSerial)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseDtwParallel)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);

struct EnsembleFixture {
  SyntheticCase sc = make_synthetic({});
  HistoryMatchProblem problem = sc.problem();
  Eigen::MatrixXd members = sample_prior(problem.space, 32, 3);
};

EnsembleFixture& fixture() {
  static EnsembleFixture f;
  return f;
}

void BM_ForwardEnsembleSerial(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::forward_ensemble_serial(f.problem, f.members));
}
void BM_ForwardEnsembleParallel(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::forward_ensemble_parallel(f.problem, f.members));
}
BENCHMARK(BM_ForwardEnsembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardEnsembleParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

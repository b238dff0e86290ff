// Parallel kernels against their serial references.
//
//   ./build/bench/usd_bench --benchmark_filter=Similarity

#include <random>

#include <benchmark/benchmark.h>

#include "usd/evaluation.hpp"
#include "usd/kernels.hpp"

namespace {

using usd::kernels::ScoringProblem;

// n usages, each scored against `per` of the shared senses.
ScoringProblem make_problem(std::size_t n, std::size_t per, std::size_t dim) {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g;
  ScoringProblem p;
  p.dim = dim;
  const std::size_t n_senses = std::max<std::size_t>(per, n / 4);
  p.usages.resize(n * dim);
  p.senses.resize(n_senses * dim);
  for (auto& x : p.usages) x = g(rng);
  for (auto& x : p.senses) x = g(rng);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t k = 0; k < per; ++k) p.candidates.push_back((u + k * 7) % n_senses);
    p.offsets.push_back(p.candidates.size());
  }
  return p;
}

template <bool Serial>
void BM_Similarity(benchmark::State& state) {
  const auto kind = state.range(1) ? usd::Similarity::spr : usd::Similarity::cos;
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), 6, 1024);
  for (auto _ : state) {
    auto out = Serial ? usd::kernels::pair_similarities_serial(p, kind) : usd::kernels::pair_similarities(p, kind);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.candidates.size()));
}

template <bool Serial>
void BM_Sweep(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> sims(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    sims[i] = u(rng);
    labels[i] = static_cast<std::uint8_t>(rng() & 1);
  }
  const auto grid = usd::eval::threshold_grid();
  for (auto _ : state) {
    auto out = Serial ? usd::kernels::sweep_confusions_serial(sims, labels, grid)
                      : usd::kernels::sweep_confusions(sims, labels, grid);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * grid.size()));
}

}  // namespace

BENCHMARK(BM_Similarity<false>)->Name("Similarity/parallel")->ArgsProduct({{256, 2048}, {0, 1}});
BENCHMARK(BM_Similarity<true>)->Name("Similarity/serial")->ArgsProduct({{256, 2048}, {0, 1}});
BENCHMARK(BM_Sweep<false>)->Name("Sweep/parallel")->Arg(1000)->Arg(100000);
BENCHMARK(BM_Sweep<true>)->Name("Sweep/serial")->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();

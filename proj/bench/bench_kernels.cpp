#include <benchmark/benchmark.h>

#include <random>

#include "sgid/kernels.hpp"

using namespace sgid::kernels;

namespace {

// Binary output over `dims` variables; the left operand spans all of them,
// the right operand every other one.
struct Setup {
  Cards cards;
  Strides sa, sb;
  std::vector<double> a, b;
  std::vector<bool> keep;

  explicit Setup(std::size_t dims) : cards(dims, 2), sa(dims), sb(dims, 0), keep(dims) {
    std::size_t step = 1;
    for (std::size_t d = dims; d-- > 0;) {
      sa[d] = step;
      step *= 2;
    }
    std::size_t bstep = 1;
    for (std::size_t d = dims; d-- > 0;) {
      if (d % 2 == 0) {
        sb[d] = bstep;
        bstep *= 2;
      }
      keep[d] = d % 3 == 0;
    }
    std::mt19937_64 rng(dims);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    a.resize(step);
    b.resize(bstep);
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
  }
};

template <auto Kernel>
void bm_combine(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = Kernel(s.cards, s.sa, s.a.data(), s.sb, s.b.data(), BinaryOp::multiply);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.a.size()));
}

template <auto Kernel>
void bm_sum_out(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = Kernel(s.cards, s.keep, s.a.data());
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.a.size()));
}

}  // namespace

BENCHMARK(bm_combine<combine_serial>)->DenseRange(12, 20, 4);
BENCHMARK(bm_combine<combine_omp>)->DenseRange(12, 20, 4);
BENCHMARK(bm_sum_out<sum_out_serial>)->DenseRange(12, 20, 4);
BENCHMARK(bm_sum_out<sum_out_omp>)->DenseRange(12, 20, 4);

BENCHMARK_MAIN();

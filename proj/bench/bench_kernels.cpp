// Serial vs OpenMP kernels at the default scenario size (H=50, N=300, 200-point grid).

#include <benchmark/benchmark.h>

#include <random>

#include "bayesun/kernels.hpp"

using namespace bayesun;

namespace {

constexpr int kHidden = 50;

Vector params(Eigen::Index p) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 0.5);
  Vector v(p);
  for (auto& x : v) x = d(rng);
  return v;
}

Dataset data(int n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs.push_back(u(rng));
    ys.push_back(std::sin(xs.back()));
  }
  return Dataset(xs, ys, 0.1);
}

template <bool Serial>
void BM_loglik_and_grad(benchmark::State& state) {
  const MlpArchitecture a{kHidden};
  const auto t = params(a.param_count());
  const auto d = data(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = Serial ? kernels::serial::loglik_and_grad(a, as_span(t), d) : kernels::omp::loglik_and_grad(a, as_span(t), d);
    benchmark::DoNotOptimize(r.loglik);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Serial>
void BM_ggn_diagonal(benchmark::State& state) {
  const MlpArchitecture a{kHidden};
  const auto t = params(a.param_count());
  const auto d = data(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto g = Serial ? kernels::serial::ggn_diagonal(a, as_span(t), d) : kernels::omp::ggn_diagonal(a, as_span(t), d);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Serial>
void BM_forward_samples(benchmark::State& state) {
  const MlpArchitecture a{kHidden};
  const auto s = state.range(0);
  Matrix thetas(s, a.param_count());
  for (Eigen::Index i = 0; i < s; ++i) thetas.row(i) = params(a.param_count()).transpose();
  std::vector<double> grid(200);
  for (int i = 0; i < 200; ++i) grid[i] = -10.0 + 20.0 * i / 199;
  for (auto _ : state) {
    auto m = Serial ? kernels::serial::forward_samples(a, thetas, grid) : kernels::omp::forward_samples(a, thetas, grid);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * s * 200);
}

}  // namespace

BENCHMARK(BM_loglik_and_grad<true>)->Name("loglik_and_grad/serial")->Arg(300)->Arg(3000);
BENCHMARK(BM_loglik_and_grad<false>)->Name("loglik_and_grad/omp")->Arg(300)->Arg(3000);
BENCHMARK(BM_ggn_diagonal<true>)->Name("ggn_diagonal/serial")->Arg(300)->Arg(3000);
BENCHMARK(BM_ggn_diagonal<false>)->Name("ggn_diagonal/omp")->Arg(300)->Arg(3000);
BENCHMARK(BM_forward_samples<true>)->Name("forward_samples/serial")->Arg(100)->Arg(1000);
BENCHMARK(BM_forward_samples<false>)->Name("forward_samples/omp")->Arg(100)->Arg(1000);

BENCHMARK_MAIN();

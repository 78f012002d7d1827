#include "cbh/solver.hpp"
#include "cbh/thermo.hpp"

#include <benchmark/benchmark.h>

namespace {

cbh::SystemParams params(int k, cbh::Index n_fock) {
  cbh::SystemParams p;
  p.k = k;
  p.g = k == 2 ? 0.2 : 1.0;
  p.kappa = 0.1;
  p.m_th = p.n_th = 0.5;
  p.n_fock = n_fock;
  return p;
}

void BM_Assemble(benchmark::State& state) {
  const cbh::SystemParams p = params(1, state.range(0));
  const auto h = cbh::hamiltonian(p);
  const auto c = cbh::collapse_set(p);
  for (auto _ : state) benchmark::DoNotOptimize(cbh::assemble(h, c, p.n_fock));
}
BENCHMARK(BM_Assemble)->Arg(20)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_DirectSolve(benchmark::State& state) {
  const cbh::SystemParams p = params(static_cast<int>(state.range(0)), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cbh::solve_steady_state(p));
}
BENCHMARK(BM_DirectSolve)->Args({1, 20})->Args({1, 48})->Args({1, 96})->Args({2, 96})->Unit(benchmark::kMillisecond);

void BM_FullVersusBlockSolve(benchmark::State& state) {
  const cbh::SystemParams p = params(1, 40);
  cbh::SolverConfig cfg;
  cfg.block_decomposition = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(cbh::solve_steady_state(p, cfg));
}
BENCHMARK(BM_FullVersusBlockSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Propagate(benchmark::State& state) {
  const cbh::SystemParams p = params(1, state.range(0));
  cbh::SolverConfig cfg;
  cfg.method = cbh::SolveMethod::propagate;
  for (auto _ : state) benchmark::DoNotOptimize(cbh::solve_steady_state(p, cfg));
}
BENCHMARK(BM_Propagate)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ResponsePoint(benchmark::State& state) {
  const cbh::SystemParams p = params(1, 20);
  cbh::ResponseOptions o;
  o.richardson_check = false;
  for (auto _ : state) benchmark::DoNotOptimize(cbh::response_common(p, 0.9, {}, {}, o));
}
BENCHMARK(BM_ResponsePoint)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

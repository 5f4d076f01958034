// Serial reference against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include "modpi/smeared.hpp"

using namespace modpi;

namespace {

const PhysicalParams P{};

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_theta_eval(benchmark::State& s) {
  CMat t(2, 2);
  t << cplx(0.3, 0.05), cplx(0.1, 0.01), cplx(0.1, 0.01), cplx(-0.2, 0.04);
  const SiegelMatrix tau(t);
  CVec z(2);
  z << cplx(0.2, 0.1), cplx(-0.4, 0.05);
  const ThetaTruncation tr{1e-14, 512};
  for (auto _ : s) benchmark::DoNotOptimize(theta_eval(z, tau, tr, exec_of(s)));
}

void BM_transfer(benchmark::State& s) {
  const auto req = AmplitudeRequest::make(P, 0.2);
  const CellTensor grid = CellTensor::make(req.lattice, static_cast<int>(s.range(1)));
  std::vector<cplx> v(grid.size(), 1.0);
  for (auto _ : s) benchmark::DoNotOptimize(smeared_transfer(v, grid, 0.1, req, exec_of(s)));
}

void BM_compose_pointwise(benchmark::State& s) {
  auto req = AmplitudeRequest::make(P, 0.2);
  req.X0 = PhasePoint(-0.3, 0.4);
  req.Xf = PhasePoint(0.1, 0.2);
  for (auto _ : s) benchmark::DoNotOptimize(compose_amplitude(req, {2, 24, 2e7}, exec_of(s)));
}

void BM_compose_smeared(benchmark::State& s) {
  const auto req = AmplitudeRequest::make(P, 0.2);
  const auto f = GaussianState::coherent({0.3, 0.2}, P).wavefunction();
  const auto g = GaussianState::coherent({-0.1, 0.25}, P).wavefunction();
  for (auto _ : s) benchmark::DoNotOptimize(smeared_compose(req, f, g, 4, 1.0, 12, 14, exec_of(s)));
}

}  // namespace

// range(0): 0 serial, 1 parallel. The serial transfer is the direct O(Q^4) sum, so the
// transfer and smeared rows compare algorithms as well as threads.
BENCHMARK(BM_theta_eval)->Arg(0)->Arg(1);
BENCHMARK(BM_transfer)->Args({0, 12})->Args({1, 12})->Args({0, 24})->Args({1, 24})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_compose_pointwise)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_compose_smeared)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

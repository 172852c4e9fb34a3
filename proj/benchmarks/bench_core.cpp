// Copyright 2026 The snlse-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "snlse/diagnostics.hpp"
#include "snlse/integrators.hpp"
#include "snlse/noise.hpp"

using namespace snlse;

namespace {

SpectralState random_state(int k_modes, std::uint64_t seed) {
  const SpectralGrid grid(k_modes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SpectralState s(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    s.coeffs[j] = Complex{n(rng), n(rng)} / std::pow(1.0 + std::abs(grid.mode(j)), 2.0);
  }
  return s;
}

void BM_TransformRoundTrip(benchmark::State& state) {
  const auto u = random_state(static_cast<int>(state.range(0)), 1);
  CVector values(u.coeffs.size()), coeffs(u.coeffs.size());
  for (auto _ : state) {
    u.grid.to_physical(u.coeffs, values);
    u.grid.to_spectral(values, coeffs);
    benchmark::DoNotOptimize(coeffs.data());
  }
}
BENCHMARK(BM_TransformRoundTrip)->RangeMultiplier(4)->Range(64, 1024);

void BM_StepperAdvance(benchmark::State& state) {
  auto u = random_state(static_cast<int>(state.range(0)), 2);
  SchemeParams p;
  p.mu = 0.01;
  p.tau = 0.01;
  p.noise = QWienerSpec::power_decay(8.0, 0.003);
  p.kind = state.range(1) ? SchemeKind::kSli1 : SchemeKind::kSnrli1;
  p.aliasing = state.range(2) ? Aliasing::kPadded : Aliasing::kCollocation;
  Stepper stepper(u.grid, p);
  const CVector forcing(u.coeffs.size(), Complex{1e-4, 0});
  double t = 0.0;
  for (auto _ : state) {
    stepper.advance(u.coeffs, forcing, t);
    t += p.tau;
    benchmark::DoNotOptimize(u.coeffs.data());
  }
}
BENCHMARK(BM_StepperAdvance)
    ->ArgNames({"K", "sli1", "padded"})
    ->Args({256, 0, 0})
    ->Args({256, 1, 0})
    ->Args({256, 0, 1})
    ->Args({1024, 0, 0});

void BM_FineIncrements(benchmark::State& state) {
  const SpectralGrid grid(static_cast<int>(state.range(0)));
  const auto path = sample_path(QWienerSpec::power_decay(8.0, 1.0), grid, 3, 0, 1e-4, 1 << 30);
  CVector out(grid.size());
  std::int64_t step = 0;
  for (auto _ : state) {
    path.fine_increments(step++, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FineIncrements)->Arg(64)->Arg(256);

void BM_WienerIncrementAggregate(benchmark::State& state) {
  const SpectralGrid grid(256);
  const auto path = sample_path(QWienerSpec::power_decay(8.0, 1.0), grid, 3, 0, 1e-4, 1 << 30);
  std::int64_t n = 0;
  for (auto _ : state) benchmark::DoNotOptimize(wiener_increment(path, n++, state.range(0)));
}
BENCHMARK(BM_WienerIncrementAggregate)->Arg(1)->Arg(100);

void BM_RemainderTerm(benchmark::State& state) {
  const auto v = random_state(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(compute_R_term(v, 0.3, 0.05, 1.0));
}
BENCHMARK(BM_RemainderTerm)->Arg(8)->Arg(32);

}  // namespace
BENCHMARK_MAIN();

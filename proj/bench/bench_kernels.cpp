// Copyright 2026 The lindbladfit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "lindbladfit/config.hpp"

using namespace lindbladfit;

namespace {

ModelSpec xyz_thermal(int n) { return {HamiltonianSpec::chain(HamiltonianFamily::XYZ, n), {DissipatorFamily::Thermal, n}}; }

GroundTruth truth_for(const ModelSpec& spec) {
  Rng rng(17);
  const GeneratorParams p = init_variational_params(spec, rng);
  return {p.theta_h, p.gamma()};
}

void BM_LiouvillianParallel(benchmark::State& state) {
  const ModelSpec spec = xyz_thermal(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_liouvillian_basis(spec));
}

void BM_LiouvillianSerial(benchmark::State& state) {
  const ModelSpec spec = xyz_thermal(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_liouvillian_basis_serial(spec));
}

// One training batch: J*K outcomes against J evolved states.
struct NllFixture {
  ShotDataset ds;
  std::vector<PauliCoordinates> coords;
  std::vector<DensityMatrix> states;
  std::vector<LikelihoodTerm> terms;

  explicit NllFixture(int n) {
    const ModelSpec spec = xyz_thermal(n);
    ProtocolConfig p;
    p.L = 1;
    p.K = 200;
    p.M = 1;
    p.seed = 5;
    ds = generate_dataset(spec, truth_for(spec), p);
    const LindbladModel model(spec);
    const Trajectory tr = evolve_model(model, params_of(*ds.truth), false,
                                       product_eigenstate(ds.initial_states[0]), ds.protocol.times);
    states = tr.states;
    for (const auto& s : tr.states) coords.push_back(to_pauli_coords(s));
    const Batch b = make_batch(ds, 0, 0);
    terms = b.terms;
  }
};

void run_nll(benchmark::State& state, Execution exec) {
  const NllFixture f(static_cast<int>(state.range(0)));
  std::vector<RVector> grads(f.coords.size());
  for (auto _ : state) {
    for (auto& g : grads) g = RVector::Zero(f.coords[0].size());
    benchmark::DoNotOptimize(batch_nll(f.coords, f.terms, grads, exec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.terms.size()));
}

void BM_BatchNllParallel(benchmark::State& state) { run_nll(state, Execution::Parallel); }
void BM_BatchNllSerial(benchmark::State& state) { run_nll(state, Execution::Serial); }

void BM_BatchNllDensityMatrix(benchmark::State& state) {
  const NllFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_nll_reference(f.states, f.terms));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.terms.size()));
}

void run_generation(benchmark::State& state, int threads) {
  const ModelSpec spec = xyz_thermal(static_cast<int>(state.range(0)));
  const GroundTruth truth = truth_for(spec);
  ProtocolConfig p;
  p.K = 50;
  p.M = 50;
  p.seed = 9;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(spec, truth, p));
  omp_set_num_threads(saved);
}

void BM_GenerateParallel(benchmark::State& state) { run_generation(state, omp_get_num_procs()); }
void BM_GenerateSerial(benchmark::State& state) { run_generation(state, 1); }

}  // namespace

BENCHMARK(BM_LiouvillianParallel)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LiouvillianSerial)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchNllParallel)->DenseRange(2, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BatchNllSerial)->DenseRange(2, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BatchNllDensityMatrix)->DenseRange(2, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GenerateParallel)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateSerial)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

// Copyright 2026 The segkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel kernels vs their serial reference implementations.
// Run with --benchmark_filter=... to narrow; OMP_NUM_THREADS controls the
// parallel side.

#include <benchmark/benchmark.h>

#include "segkit/filtering.hpp"
#include "segkit/graph.hpp"
#include "segkit/metrics.hpp"
#include "segkit/ref.hpp"
#include "segkit/rng.hpp"
#include "segkit/types.hpp"

namespace {

using namespace segkit;

Mask make_mask(int size, std::uint64_t seed) {
  Rng rng(seed);
  Mask m = Mask::zeros(size, size);
  for (double& v : m.data) v = rng.uniform01();
  return m;
}

Image make_guide(int size, std::uint64_t seed) {
  Rng rng(seed);
  Image g = Image::zeros(size, size, 1);
  for (double& v : g.data) v = rng.uniform01();
  return g;
}

FeatureMap make_features(int grid, int dim, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMap f = FeatureMap::zeros(grid, grid, dim);
  for (double& v : f.data) v = rng.uniform(-1.0, 1.0);
  return f;
}

void BM_BoxFilter(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Mask m = make_mask(size, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(filtering::box_filter(m, 4));
}

void BM_BoxFilterRef(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Mask m = make_mask(size, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(ref::box_filter_naive(m, 4));
}

void BM_GuidedFilter(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Mask m = make_mask(size, 2);
  const Image g = make_guide(size, 3);
  const filtering::GuidedFilterParams params{4, 1e-4};
  for (auto _ : state)
    benchmark::DoNotOptimize(filtering::guided_filter(m, g, params));
}

void BM_GuidedFilterRef(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Mask m = make_mask(size, 2);
  const Image g = make_guide(size, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(ref::guided_filter_naive(m, g, 4, 1e-4));
}

void BM_TokencutAffinity(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const FeatureMap f = make_features(grid, 16, 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(graph::tokencut_affinity(f, 0.2, 1e-5));
}

void BM_TokencutAffinityRef(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const FeatureMap f = make_features(grid, 16, 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(ref::tokencut_affinity_naive(f, 0.2, 1e-5));
}

void BM_SoftNcut(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform01();
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  std::vector<double> s(static_cast<std::size_t>(n));
  for (double& v : s) v = rng.uniform01();
  for (auto _ : state)
    benchmark::DoNotOptimize(graph::soft_ncut_loss(w, s, 1e-8));
}

void BM_SoftNcutRef(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform01();
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  std::vector<double> s(static_cast<std::size_t>(n));
  for (double& v : s) v = rng.uniform01();
  for (auto _ : state)
    benchmark::DoNotOptimize(ref::soft_ncut_naive(w, s, 1e-8));
}

void BM_BruteForceNcut(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(6);
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform01();
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  for (auto _ : state)
    benchmark::DoNotOptimize(graph::brute_force_min_ncut(w));
}

void BM_BruteForceNcutRef(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(6);
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform01();
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  for (auto _ : state)
    benchmark::DoNotOptimize(ref::brute_force_min_ncut_serial(w));
}

void BM_MaxFBeta(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Mask pred = make_mask(size, 7);
  const metrics::BinaryMask gt = metrics::binarize(make_mask(size, 8), 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(metrics::max_f_beta(pred, gt, 0.3));
}

void BM_MaxFBetaRef(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Mask pred = make_mask(size, 7);
  const metrics::BinaryMask gt = metrics::binarize(make_mask(size, 8), 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(ref::max_f_beta_exhaustive(pred, gt, 0.3));
}

}  // namespace

BENCHMARK(BM_BoxFilter)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_BoxFilterRef)->Arg(64)->Arg(256);
BENCHMARK(BM_GuidedFilter)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_GuidedFilterRef)->Arg(64)->Arg(256);
BENCHMARK(BM_TokencutAffinity)->Arg(16)->Arg(32)->Arg(48);
BENCHMARK(BM_TokencutAffinityRef)->Arg(16)->Arg(32);
BENCHMARK(BM_SoftNcut)->Arg(256)->Arg(1024);
BENCHMARK(BM_SoftNcutRef)->Arg(256)->Arg(1024);
BENCHMARK(BM_BruteForceNcut)->Arg(12)->Arg(16);
BENCHMARK(BM_BruteForceNcutRef)->Arg(12)->Arg(16);
BENCHMARK(BM_MaxFBeta)->Arg(128)->Arg(512);
BENCHMARK(BM_MaxFBetaRef)->Arg(128)->Arg(512);

BENCHMARK_MAIN();

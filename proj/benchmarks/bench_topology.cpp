/*
 * Copyright 2026 The TorusForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "torusforge/collectives.hpp"
#include "torusforge/topology.hpp"

namespace torusforge {
namespace {

SliceShape shape_arg(const benchmark::State& state) {
  return {static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
          static_cast<int>(state.range(2))};
}

void BM_BuildTopology(benchmark::State& state) {
  const SliceShape s = shape_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(build_topology(s, {}));
}
BENCHMARK(BM_BuildTopology)->Args({4, 4, 8})->Args({8, 8, 8})->Args({16, 16, 16});

void BM_LinkLoads(benchmark::State& state) {
  const SliceShape s = shape_arg(state);
  const auto method = state.range(3) ? LoadMethod::symmetric : LoadMethod::exhaustive;
  const auto g = build_topology(s, is_twistable(s) ? TwistSpec::standard(s) : TwistSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(all_to_all_link_loads(g, 1.0, {method, 1}).max_load);
  state.SetLabel(method == LoadMethod::symmetric ? "symmetric" : "exhaustive");
}
BENCHMARK(BM_LinkLoads)
    ->Args({4, 4, 8, 0})
    ->Args({4, 4, 8, 1})
    ->Args({4, 8, 8, 0})
    ->Args({8, 8, 16, 1})
    ->Args({16, 16, 16, 1})
    ->Unit(benchmark::kMillisecond);

void BM_PathMetrics(benchmark::State& state) {
  const auto g = build_topology(shape_arg(state), {});
  for (auto _ : state) benchmark::DoNotOptimize(path_metrics(g, 1).diameter);
}
BENCHMARK(BM_PathMetrics)->Args({4, 4, 8})->Args({8, 8, 8})->Unit(benchmark::kMillisecond);

void BM_TwistedGain(benchmark::State& state) {
  const SliceShape s = shape_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(collectives::twisted_gain(s, 1));
}
BENCHMARK(BM_TwistedGain)->Args({4, 4, 8})->Args({4, 8, 8})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace torusforge

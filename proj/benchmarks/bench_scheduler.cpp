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

#include <numeric>

#include "torusforge/ocs_fabric.hpp"
#include "torusforge/scheduler.hpp"

namespace torusforge {
namespace {

void BM_PlanCabling(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ocs::plan_cabling(64));
}
BENCHMARK(BM_PlanCabling);

void BM_ConfigureAndVerify(benchmark::State& state) {
  const auto plan = ocs::plan_cabling(64);
  const SliceShape grid{2, 2, 4};
  std::vector<int> blocks(16);
  std::iota(blocks.begin(), blocks.end(), 0);
  const auto twist = TwistSpec::standard(grid.scaled(4));
  for (auto _ : state) {
    const auto xc = ocs::configure_slice(plan, blocks, grid, twist);
    benchmark::DoNotOptimize(ocs::verify_crossconnect(plan, xc).ok);
  }
}
BENCHMARK(BM_ConfigureAndVerify)->Unit(benchmark::kMillisecond);

void BM_Goodput(benchmark::State& state) {
  const auto mode = state.range(1) ? scheduler::GoodputMode::static_wiring
                                   : scheduler::GoodputMode::ocs;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scheduler::goodput(state.range(0), {0.995}, mode, 10000, 1, 1).mean);
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Goodput)->Args({1024, 0})->Args({1024, 1})->Args({3072, 0})->Unit(benchmark::kMillisecond);

void BM_ExactGoodput(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(scheduler::exact_ocs_goodput(2048, {0.995}));
}
BENCHMARK(BM_ExactGoodput);

}  // namespace
}  // namespace torusforge

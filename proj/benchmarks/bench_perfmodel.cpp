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

#include "torusforge/perfmodel.hpp"

namespace torusforge::perf {
namespace {

ChipSpec chip() {
  ChipSpec c;
  c.name = "bench";
  c.peak_flops = 275e12;
  c.hbm_bw = 1200e9;
  c.hbm_capacity = 32e9;
  c.ici_links = 6;
  c.ici_bw = 50e9;
  c.chips_per_host = 4;
  return c;
}

EmbeddingWorkload dense() {
  EmbeddingWorkload w;
  w.global_batch = 1024;
  w.dense_flops_per_sample = 6.3e14;
  w.dense_param_bytes = 1e11;
  w.activation_bytes_per_sample = 3.2e9;
  return w;
}

void BM_Search(benchmark::State& state) {
  const auto w = dense();
  const auto c = chip();
  std::size_t candidates = 0;
  for (auto _ : state) {
    const auto ranked = search_best_config(state.range(0), w, c, {}, 1);
    candidates = ranked.size();
    benchmark::DoNotOptimize(ranked.data());
  }
  state.counters["candidates"] = static_cast<double>(candidates);
}
BENCHMARK(BM_Search)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_EmbeddingStep(benchmark::State& state) {
  EmbeddingWorkload w;
  w.global_batch = 65536;
  w.dense_flops_per_sample = 2e7;
  for (int t = 0; t < 26; ++t) w.tables.push_back({1000000, 128, 1.0, 1});
  const auto c = chip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        embedding_step_time(w, {}, {4, 4, 8}, {}, c, 25e9, 4).step_seconds);
  }
}
BENCHMARK(BM_EmbeddingStep);

}  // namespace
}  // namespace torusforge::perf

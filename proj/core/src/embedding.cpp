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

#include <algorithm>

#include "torusforge/collectives.hpp"
#include "torusforge/error.hpp"
#include "torusforge/perfmodel.hpp"

namespace torusforge::perf {

std::string_view to_string(TableSharding s) {
  switch (s) {
    case TableSharding::row:
      return "row";
    case TableSharding::column:
      return "column";
    case TableSharding::table:
      return "table";
    case TableSharding::replicated:
      return "replicated";
  }
  return "?";
}

std::string_view to_string(Placement p) {
  return p == Placement::host_cpu ? "host_cpu" : "accelerator_hbm";
}

TableSharding parse_table_sharding(std::string_view text) {
  if (text == "row") return TableSharding::row;
  if (text == "column") return TableSharding::column;
  if (text == "table") return TableSharding::table;
  if (text == "replicated") return TableSharding::replicated;
  throw ValidationError("table sharding must be row, column, table or replicated");
}

Placement parse_placement(std::string_view text) {
  if (text == "accelerator_hbm" || text == "hbm") return Placement::accelerator_hbm;
  if (text == "host_cpu" || text == "host") return Placement::host_cpu;
  throw ValidationError("placement must be accelerator_hbm or host_cpu");
}

EmbeddingStepTime embedding_step_time(const EmbeddingWorkload& workload,
                                      const ShardingStrategy& sharding,
                                      const SliceShape& shape, const TwistSpec& twist,
                                      const ChipSpec& chip, double host_dram_bw,
                                      int chips_per_host, const ModelConstants& constants) {
  workload.validate();
  if (!sharding.per_table.empty() && sharding.per_table.size() != workload.tables.size()) {
    throw ValidationError("sharding lists " + std::to_string(sharding.per_table.size()) +
                          " tables but the workload has " +
                          std::to_string(workload.tables.size()));
  }
  if (!(chip.ici_bw > 0.0)) throw ValidationError("ICI link bandwidth must be positive");
  if (!(chip.peak_flops > 0.0)) throw ValidationError("peak FLOP/s must be positive");
  const bool on_host = sharding.placement == Placement::host_cpu;
  if (on_host) {
    if (!(host_dram_bw > 0.0)) throw ValidationError("host DRAM bandwidth must be positive");
    if (chips_per_host < 1) throw ValidationError("chips per host must be >= 1");
  } else if (!chip.hbm_bw || !(*chip.hbm_bw > 0.0)) {
    throw ValidationError("chip " + chip.name + " has no usable HBM bandwidth");
  }

  const double chips = static_cast<double>(shape.chips());
  const double batch = static_cast<double>(workload.global_batch);
  const double bytes = EmbeddingWorkload::kElementBytes;

  double sharded_lookup = 0.0;
  double replicated_lookup = 0.0;
  double replicated_table_bytes = 0.0;
  for (std::size_t i = 0; i < workload.tables.size(); ++i) {
    const auto& t = workload.tables[i];
    const double per_step = batch * t.features * t.valency * static_cast<double>(t.width) *
                            bytes / workload.dedup;
    const bool replicated = !sharding.per_table.empty() &&
                            sharding.per_table[i] == TableSharding::replicated;
    if (replicated) {
      replicated_lookup += per_step;
      replicated_table_bytes += static_cast<double>(t.vocab_size) * t.width * bytes;
    } else {
      sharded_lookup += per_step;
    }
  }
  if (replicated_table_bytes > 0.0 && !on_host && chip.hbm_capacity &&
      replicated_table_bytes > *chip.hbm_capacity) {
    throw ValidationError("replicated tables need " +
                          std::to_string(static_cast<long long>(replicated_table_bytes)) +
                          " bytes per chip, more than the HBM capacity of " + chip.name);
  }

  EmbeddingStepTime r;
  r.lookup_bytes = sharded_lookup + replicated_lookup;
  r.bisection_bw = bisection_bw(shape, twist, chip).per_direction;

  const double traffic = 2.0 * r.lookup_bytes;
  r.hbm_time = on_host ? traffic * chips_per_host / (chips * host_dram_bw)
                       : traffic / (chips * *chip.hbm_bw);

  // Half of the all-to-all crosses any balanced cut, in each of two passes.
  double alltoall = 2.0 * (sharded_lookup / 2.0) / r.bisection_bw;
  if (on_host) alltoall *= constants.host_network_penalty;
  double gradients = 0.0;
  if (replicated_table_bytes > 0.0) {
    gradients = collectives::allreduce_time(shape, replicated_table_bytes,
                                            {chip.ici_bw, 1}, shape.is_block_granular())
                    .seconds;
  }
  r.net_time = alltoall + gradients;

  r.overhead = constants.sparse_overhead_base +
               constants.sparse_overhead_per_feature * static_cast<double>(workload.feature_count());
  r.sparse_time = r.overhead + std::max(r.hbm_time, r.net_time);
  r.dense_time = batch * workload.dense_flops_per_sample /
                 (chips * chip.peak_flops * constants.efficiency);
  r.step_seconds = std::max(r.sparse_time, r.dense_time);
  return r;
}

}  // namespace torusforge::perf

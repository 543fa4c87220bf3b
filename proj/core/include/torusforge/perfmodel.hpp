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

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "torusforge/chip.hpp"
#include "torusforge/shape.hpp"

namespace torusforge::perf {

// ---------------------------------------------------------------------------
// Model constants
// ---------------------------------------------------------------------------

/// Uncalibrated knobs of the throughput and step-time models. The shipped
/// values live in data/model_constants.json; the member defaults mirror that
/// file so a default-constructed instance behaves like the shipped one.
struct ModelConstants {
  double efficiency = 0.5;           // achieved fraction of peak FLOP/s
  double mp_volume_2d2d = 1.0;       // model-parallel volume multipliers
  double mp_volume_1d2d = 1.5;
  double mp_volume_1d1d = 2.0;
  double microbatch_factor = 2.0;    // microbatches = factor * pipeline depth
  double sparse_overhead_base = 150e-6;        // s per step
  double sparse_overhead_per_feature = 2e-6;   // s per feature per step
  double host_dram_bw = 25e9;        // effective gather bytes/s per CPU host
  double host_network_penalty = 2.0; // multiplier on sharded all-to-all time

  static ModelConstants load(const std::string& path);
  static ModelConstants parse(const std::string& json_text);
  bool operator==(const ModelConstants&) const = default;
};

// ---------------------------------------------------------------------------
// Roofline and bisection
// ---------------------------------------------------------------------------

/// min(peak, oi * hbm_bw). Throws for chips without HBM.
double roofline(const ChipSpec& chip, double operational_intensity);
double ridge_point(const ChipSpec& chip);

struct BisectionBandwidth {
  std::int64_t links = 0;
  double per_direction = 0.0;  // bytes/s
  double bidirectional = 0.0;
};

BisectionBandwidth bisection_bw(const SliceShape& shape, const TwistSpec& twist,
                                const ChipSpec& chip);

// ---------------------------------------------------------------------------
// Parallelism mapping
// ---------------------------------------------------------------------------

enum class Partitioning { p1D_1D, p1D_2D, p2D_2D };
std::string_view to_string(Partitioning p);
Partitioning parse_partitioning(std::string_view text);

enum class Factor { pipeline = 0, data = 1, model1 = 2, model2 = 3 };
inline constexpr int kFactors = 4;
std::string_view to_string(Factor f);

struct ParallelismSpec {
  std::int64_t pipeline = 1;
  std::int64_t data = 1;
  std::int64_t model1 = 1;
  std::int64_t model2 = 1;
  Partitioning partitioning = Partitioning::p2D_2D;

  std::int64_t operator[](Factor f) const;
  std::int64_t product() const { return pipeline * data * model1 * model2; }
  auto operator<=>(const ParallelismSpec&) const = default;
  /// "[1, 1, 64, 8] 1D/2D"
  std::string to_string() const;
};

struct AxisSegment {
  int axis = 0;
  int extent = 1;
  bool full_axis = false;  // covers the whole torus ring, wraparound included
  bool operator==(const AxisSegment&) const = default;
};

struct MappingPlan {
  SliceShape shape;
  ParallelismSpec spec;
  std::array<std::vector<AxisSegment>, kFactors> segments;

  const std::vector<AxisSegment>& of(Factor f) const {
    return segments[static_cast<int>(f)];
  }
};

/// Greedy axis assignment in the order pipeline, data, model1, model2. Each
/// factor takes, by preference: one axis of exactly its size; a run of
/// consecutive remaining axes whose product matches; an exact sub-factor of
/// one axis; or a run of whole axes finished by a sub-factor of the next.
/// Throws ValidationError when the product mismatches or no exact
/// factorization is found.
MappingPlan map_parallelism(const SliceShape& shape, const ParallelismSpec& spec);

/// Bandwidth-only ring collective (reduce-scatter plus all-gather) over the
/// chips spanned by `segments`; wraparound only on full-axis segments.
double group_allreduce_time(const std::vector<AxisSegment>& segments, double bytes,
                            double link_bw);

// ---------------------------------------------------------------------------
// Workloads
// ---------------------------------------------------------------------------

struct EmbeddingTable {
  std::int64_t vocab_size = 0;
  std::int64_t width = 0;       // elements
  double valency = 1.0;         // average lookups per sample per feature
  int features = 1;             // features that look up this table
};

struct EmbeddingWorkload {
  static constexpr double kElementBytes = 4.0;

  std::vector<EmbeddingTable> tables;
  std::int64_t global_batch = 0;
  double dedup = 1.0;
  double dense_flops_per_sample = 0.0;
  double dense_param_bytes = 0.0;
  double activation_bytes_per_sample = 0.0;  // model-parallel exchange volume

  std::int64_t feature_count() const;
  void validate() const;

  static EmbeddingWorkload parse(const std::string& json_text);
  static EmbeddingWorkload load(const std::string& path);
};

// ---------------------------------------------------------------------------
// Dense throughput and configuration search
// ---------------------------------------------------------------------------

struct DenseEstimate {
  double compute = 0.0;         // s
  double data_parallel = 0.0;   // s, gradient all-reduce
  double model_parallel = 0.0;  // s, activation exchange
  double bubble_fraction = 0.0;
  double step_seconds = 0.0;
  double throughput = 0.0;      // sequences (samples) per second
};

DenseEstimate estimate_dense_throughput(const EmbeddingWorkload& workload,
                                        const MappingPlan& plan, const ChipSpec& chip,
                                        const ModelConstants& constants = {});

/// Sorted block-granular shapes (x <= y <= z, multiples of 4) of n chips.
std::vector<SliceShape> enumerate_block_shapes(std::int64_t n_chips);

struct SearchCandidate {
  SliceShape shape;
  ParallelismSpec spec;
  DenseEstimate estimate;
};

/// Every mappable (shape, [p, d, m1, m2], partitioning) for n chips, ranked by
/// throughput descending with ties broken by (shape, spec) ascending.
std::vector<SearchCandidate> search_best_config(std::int64_t n_chips,
                                                const EmbeddingWorkload& workload,
                                                const ChipSpec& chip,
                                                const ModelConstants& constants = {},
                                                unsigned threads = 0);

// ---------------------------------------------------------------------------
// Embedding training step
// ---------------------------------------------------------------------------

enum class TableSharding { row, column, table, replicated };
enum class Placement { accelerator_hbm, host_cpu };
std::string_view to_string(TableSharding s);
std::string_view to_string(Placement p);
TableSharding parse_table_sharding(std::string_view text);
Placement parse_placement(std::string_view text);

struct ShardingStrategy {
  std::vector<TableSharding> per_table;  // empty means row-sharded everywhere
  Placement placement = Placement::accelerator_hbm;
};

struct EmbeddingStepTime {
  double step_seconds = 0.0;
  double sparse_time = 0.0;
  double dense_time = 0.0;
  double hbm_time = 0.0;      // lookup memory traffic
  double net_time = 0.0;      // all-to-all plus replicated-gradient all-reduce
  double overhead = 0.0;      // fixed per-step cost
  double lookup_bytes = 0.0;  // L, one pass
  double bisection_bw = 0.0;  // bytes/s per direction
};

/// Step time is the maximum of the sparse (embedding) and dense paths:
///   L      = batch * sum(features * valency * width * 4) / dedup
///   hbm    = 2L / (N * hbm_bw), or 2L * chips_per_host / (N * host_dram_bw)
///            when tables sit in host memory
///   net    = L_sharded / bisection + all-reduce of replicated tables
///   sparse = overhead + max(hbm, net)
///   dense  = batch * flops / (N * peak * efficiency)
EmbeddingStepTime embedding_step_time(const EmbeddingWorkload& workload,
                                      const ShardingStrategy& sharding,
                                      const SliceShape& shape, const TwistSpec& twist,
                                      const ChipSpec& chip, double host_dram_bw,
                                      int chips_per_host, const ModelConstants& constants = {});

}  // namespace torusforge::perf

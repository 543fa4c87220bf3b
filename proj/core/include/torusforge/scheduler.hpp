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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "torusforge/ocs_fabric.hpp"
#include "torusforge/shape.hpp"

namespace torusforge::scheduler {

enum class ShapeClass { SubBlockMesh, RegularTorus, TwistableTorus };

std::string_view to_string(ShapeClass c);

/// Classifies a scheduler-facing slice geometry.
///
///  - SubBlockMesh: every dimension in {1, 2, 4} and fewer than 64 chips.
///  - TwistableTorus: block-granular n x n x 2n or n x 2n x 2n, n >= 4.
///  - RegularTorus: any other shape whose dimensions are all multiples of 4.
///
/// Throws ValidationError for zero or unsorted dimensions and for any other
/// dimension that is not a multiple of 4.
ShapeClass validate_shape(const SliceShape& shape);

struct SliceRequest {
  SliceShape shape;
  bool twisted = false;
};

struct Allocation {
  std::vector<int> blocks;
  SliceShape block_grid;
  // Absent for sub-block meshes, which live on one block's electrical mesh.
  std::optional<ocs::CrossConnect> cross_connect;
};

class AllocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Takes the lowest-numbered healthy blocks; OCS reach is uniform so no
/// contiguity is required.
Allocation allocate(const SliceRequest& request, std::span<const int> healthy_blocks,
                    const ocs::CablingPlan& plan);

struct AvailabilityModel {
  double host_availability = 1.0;
  int hosts = ocs::kMaxBlocks * ocs::kHostsPerBlock;  // 1024
  bool independent = true;

  int blocks() const { return hosts / ocs::kHostsPerBlock; }
  std::int64_t machine_chips() const { return std::int64_t{blocks()} * ocs::kChipsPerBlock; }
};

enum class GoodputMode { ocs, static_wiring };

std::string_view to_string(GoodputMode mode);
GoodputMode parse_goodput_mode(std::string_view text);

struct GoodputReport {
  std::int64_t slice_chips = 0;
  GoodputMode mode = GoodputMode::ocs;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double cap = 0.0;  // floor(machine / slice) * slice / machine
};

/// Slices schedulable in one Monte-Carlo trial under both wirings; the same
/// host failures drive both.
struct TrialOutcome {
  int healthy_blocks = 0;
  int ocs_slices = 0;
  int static_slices = 0;
};

TrialOutcome simulate_trial(std::int64_t slice_chips, const AvailabilityModel& model,
                            std::uint64_t seed, std::uint64_t trial);

/// Monte-Carlo goodput. Each trial draws independent host failures from a
/// counter-based stream keyed by (seed, trial), so the report is identical for
/// any thread count.
GoodputReport goodput(std::int64_t slice_chips, const AvailabilityModel& model, GoodputMode mode,
                      std::int64_t trials, std::uint64_t seed, unsigned threads = 0);

/// Exact OCS-mode expectation: healthy blocks ~ Binomial(blocks, p^16).
double exact_ocs_goodput(std::int64_t slice_chips, const AvailabilityModel& model);

/// Uniform double in [0, 1) for draw `counter` of stream (seed, trial).
double counter_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t counter);

}  // namespace torusforge::scheduler

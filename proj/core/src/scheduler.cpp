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

#include "torusforge/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "torusforge/error.hpp"
#include "torusforge/parallel.hpp"

namespace torusforge::scheduler {

namespace {

bool divides_block_edge(int d) { return d == 1 || d == 2 || d == 4; }

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::int64_t kTrialChunk = 256;

void check_goodput_inputs(std::int64_t slice_chips, const AvailabilityModel& model) {
  if (!(model.host_availability >= 0.0 && model.host_availability <= 1.0)) {
    throw ValidationError("host availability must lie in [0, 1]");
  }
  if (model.hosts <= 0 || model.hosts % ocs::kHostsPerBlock != 0) {
    throw ValidationError("host count must be a positive multiple of 16");
  }
  if (slice_chips < ocs::kChipsPerBlock || slice_chips % ocs::kChipsPerBlock != 0) {
    throw ValidationError("slice must be a whole number of 64-chip blocks, got " +
                          std::to_string(slice_chips));
  }
  if (slice_chips > model.machine_chips()) {
    throw ValidationError("slice of " + std::to_string(slice_chips) +
                          " chips is larger than the machine (" +
                          std::to_string(model.machine_chips()) + ")");
  }
}

}  // namespace

std::string_view to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::SubBlockMesh:
      return "SubBlockMesh";
    case ShapeClass::RegularTorus:
      return "RegularTorus";
    case ShapeClass::TwistableTorus:
      return "TwistableTorus";
  }
  return "?";
}

ShapeClass validate_shape(const SliceShape& shape) {
  if (!shape.positive()) {
    throw ValidationError("shape " + shape.to_string() + " has a zero or negative dimension");
  }
  if (!shape.is_sorted()) {
    throw ValidationError("shape " + shape.to_string() + " must satisfy x <= y <= z");
  }
  if (divides_block_edge(shape.x) && divides_block_edge(shape.y) && divides_block_edge(shape.z) &&
      shape.chips() < ocs::kChipsPerBlock) {
    return ShapeClass::SubBlockMesh;
  }
  if (!shape.is_block_granular()) {
    throw ValidationError("shape " + shape.to_string() +
                          " is neither a sub-block mesh nor a multiple of 4 in every dimension");
  }
  return is_twistable(shape) ? ShapeClass::TwistableTorus : ShapeClass::RegularTorus;
}

Allocation allocate(const SliceRequest& request, std::span<const int> healthy_blocks,
                    const ocs::CablingPlan& plan) {
  const ShapeClass cls = validate_shape(request.shape);
  if (request.twisted && cls != ShapeClass::TwistableTorus) {
    throw ValidationError("twist requested on non-twistable shape " + request.shape.to_string());
  }
  std::set<int> healthy;
  for (int b : healthy_blocks) {
    if (!plan.contains_block(b)) {
      throw ValidationError("healthy block " + std::to_string(b) + " is not in the machine");
    }
    healthy.insert(b);
  }

  Allocation alloc;
  if (cls == ShapeClass::SubBlockMesh) {
    if (healthy.empty()) throw AllocationError("insufficient blocks: need 1, have 0");
    alloc.blocks = {*healthy.begin()};
    alloc.block_grid = {1, 1, 1};
    return alloc;
  }

  const auto needed = static_cast<std::size_t>(request.shape.chips() / ocs::kChipsPerBlock);
  if (healthy.size() < needed) {
    throw AllocationError("insufficient blocks: need " + std::to_string(needed) + ", have " +
                          std::to_string(healthy.size()));
  }
  alloc.blocks.assign(healthy.begin(), std::next(healthy.begin(), static_cast<long>(needed)));
  alloc.block_grid = {request.shape.x / ocs::kBlockEdge, request.shape.y / ocs::kBlockEdge,
                      request.shape.z / ocs::kBlockEdge};
  const TwistSpec twist = request.twisted ? TwistSpec::standard(request.shape) : TwistSpec{};
  alloc.cross_connect = ocs::configure_slice(plan, alloc.blocks, alloc.block_grid, twist);
  return alloc;
}

std::string_view to_string(GoodputMode mode) {
  return mode == GoodputMode::ocs ? "ocs" : "static";
}

GoodputMode parse_goodput_mode(std::string_view text) {
  if (text == "ocs") return GoodputMode::ocs;
  if (text == "static") return GoodputMode::static_wiring;
  throw ValidationError("mode must be 'ocs' or 'static', got '" + std::string(text) + "'");
}

double counter_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t counter) {
  const std::uint64_t stream = splitmix64(seed ^ splitmix64(trial + 0x632BE59BD9B4E019ull));
  const std::uint64_t bits = splitmix64(stream + counter * 0x9E3779B97F4A7C15ull);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

TrialOutcome simulate_trial(std::int64_t slice_chips, const AvailabilityModel& model,
                            std::uint64_t seed, std::uint64_t trial) {
  const int blocks = model.blocks();
  const int per_slice = static_cast<int>(slice_chips / ocs::kChipsPerBlock);
  const double p = model.host_availability;

  TrialOutcome out;
  int group_healthy = 0;
  for (int b = 0; b < blocks; ++b) {
    bool up = true;
    // Every host is drawn so a block's stream does not depend on its neighbours.
    for (int h = 0; h < ocs::kHostsPerBlock; ++h) {
      const auto host = static_cast<std::uint64_t>(b) * ocs::kHostsPerBlock + h;
      if (!(counter_uniform(seed, trial, host) < p)) up = false;
    }
    if (up) {
      ++out.healthy_blocks;
      ++group_healthy;
    }
    // Static wiring: fixed groups of consecutive block ids.
    if ((b + 1) % per_slice == 0) {
      if (group_healthy == per_slice) ++out.static_slices;
      group_healthy = 0;
    }
  }
  out.ocs_slices = out.healthy_blocks / per_slice;
  return out;
}

GoodputReport goodput(std::int64_t slice_chips, const AvailabilityModel& model, GoodputMode mode,
                      std::int64_t trials, std::uint64_t seed, unsigned threads) {
  check_goodput_inputs(slice_chips, model);
  if (trials < 1) throw ValidationError("trial count must be at least 1");

  struct Sums {
    std::uint64_t k = 0;
    std::uint64_t k2 = 0;
  };
  const auto chunks = static_cast<std::size_t>((trials + kTrialChunk - 1) / kTrialChunk);
  std::vector<Sums> partial(chunks);
  parallel_for_chunks(chunks, threads, [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kTrialChunk;
    const std::int64_t end = std::min(trials, begin + kTrialChunk);
    for (std::int64_t t = begin; t < end; ++t) {
      const TrialOutcome o = simulate_trial(slice_chips, model, seed, static_cast<std::uint64_t>(t));
      const std::uint64_t k = mode == GoodputMode::ocs ? o.ocs_slices : o.static_slices;
      partial[c].k += k;
      partial[c].k2 += k * k;
    }
  });
  Sums total;
  for (const auto& s : partial) {
    total.k += s.k;
    total.k2 += s.k2;
  }

  const double machine = static_cast<double>(model.machine_chips());
  const double scale = static_cast<double>(slice_chips) / machine;
  const double n = static_cast<double>(trials);
  const double mean_k = static_cast<double>(total.k) / n;

  GoodputReport r;
  r.slice_chips = slice_chips;
  r.mode = mode;
  r.trials = trials;
  r.seed = seed;
  r.mean = mean_k * scale;
  if (trials > 1) {
    const double var_k =
        std::max(0.0, (static_cast<double>(total.k2) - n * mean_k * mean_k) / (n - 1.0));
    r.std_error = std::sqrt(var_k / n) * scale;
  }
  r.cap = static_cast<double>(model.machine_chips() / slice_chips) * scale;
  return r;
}

double exact_ocs_goodput(std::int64_t slice_chips, const AvailabilityModel& model) {
  check_goodput_inputs(slice_chips, model);
  const int blocks = model.blocks();
  const int per_slice = static_cast<int>(slice_chips / ocs::kChipsPerBlock);
  const double q = std::pow(model.host_availability, ocs::kHostsPerBlock);
  const double scale = static_cast<double>(slice_chips) / static_cast<double>(model.machine_chips());
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return static_cast<double>(blocks / per_slice) * scale;

  double expected = 0.0;
  for (int h = 0; h <= blocks; ++h) {
    const double log_pmf = std::lgamma(blocks + 1.0) - std::lgamma(h + 1.0) -
                           std::lgamma(blocks - h + 1.0) + h * std::log(q) +
                           (blocks - h) * std::log1p(-q);
    expected += std::exp(log_pmf) * (h / per_slice);
  }
  return expected * scale;
}

}  // namespace torusforge::scheduler

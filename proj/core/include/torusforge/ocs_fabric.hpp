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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "torusforge/shape.hpp"

namespace torusforge::ocs {

inline constexpr int kBlockEdge = 4;
inline constexpr int kChipsPerBlock = 64;
inline constexpr int kChipsPerHost = 4;
inline constexpr int kHostsPerBlock = kChipsPerBlock / kChipsPerHost;  // 16
inline constexpr int kLinksPerFace = 16;
inline constexpr int kFaces = 6;
inline constexpr int kOpticalLinksPerBlock = kFaces * kLinksPerFace;     // 96
inline constexpr int kFiberPairsPerBlock = kOpticalLinksPerBlock / 2;   // 48
inline constexpr int kOcsCount = kFiberPairsPerBlock;                   // one per (dim, index)
inline constexpr int kOcsPorts = 136;
inline constexpr int kOcsUsablePorts = 128;
inline constexpr int kOcsSparePorts = kOcsPorts - kOcsUsablePorts;
inline constexpr int kMaxBlocks = kOcsUsablePorts / 2;                  // 64
inline constexpr int kRackGridColumns = 8;

/// Physical rack position of a linearized block id (row-major over 8 x 8).
/// Informational only; OCS reach is uniform, so allocation ignores it.
struct RackPosition {
  int row = 0;
  int column = 0;
};
RackPosition rack_position(int block);

/// OCS serving the fiber pair (dim, face index).
inline int ocs_for(int dim, int index) { return dim * kLinksPerFace + index; }

/// Face index of a chip on the +/- face of `dim`: the two remaining local
/// coordinates, lower dimension first, row-major.
int face_index(int dim, const Coord& local);

struct CableAssignment {
  int block = 0;
  int dim = 0;
  int index = 0;
  int ocs = 0;
  int plus_port = 0;   // "+" face fiber
  int minus_port = 0;  // "-" face fiber

  bool operator==(const CableAssignment&) const = default;
};

/// Fiber-to-port wiring of the whole machine. Both faces of a given
/// (dim, index) land on the same OCS; block b uses ports 2b ("+") and 2b+1
/// ("-") on each of the 48 switches, leaving ports 128..135 as spares.
class CablingPlan {
 public:
  explicit CablingPlan(int n_blocks);

  int n_blocks() const { return n_blocks_; }
  int ocs_count() const { return kOcsCount; }
  std::span<const CableAssignment> assignments() const { return assignments_; }
  const CableAssignment& at(int block, int dim, int index) const;

  int used_ports(int ocs) const;
  int free_ports(int ocs) const { return kOcsPorts - used_ports(ocs); }
  int spare_ports(int) const { return kOcsSparePorts; }
  int total_fiber_pairs() const { return static_cast<int>(assignments_.size()); }
  int total_used_ports() const { return 2 * total_fiber_pairs(); }

  bool contains_block(int block) const { return block >= 0 && block < n_blocks_; }
  bool is_plus_port(int port) const { return port % 2 == 0 && contains_block(port / 2); }
  bool is_minus_port(int port) const { return port % 2 == 1 && contains_block(port / 2); }

  bool operator==(const CablingPlan&) const = default;

 private:
  int n_blocks_;
  std::vector<CableAssignment> assignments_;
};

CablingPlan plan_cabling(int n_blocks);

inline int plus_port(int block) { return 2 * block; }
inline int minus_port(int block) { return 2 * block + 1; }

/// One OCS's mirror settings: input ("+" port) -> output ("-" port).
struct OcsSetting {
  int ocs = 0;
  std::vector<std::pair<int, int>> connections;

  bool operator==(const OcsSetting&) const = default;
};

/// Switch settings that realize one slice. blocks[k] occupies block-grid
/// position k (row-major); the chip-level topology is 4 * block_grid with
/// `twist`.
struct CrossConnect {
  std::vector<int> blocks;
  SliceShape block_grid;
  TwistSpec twist;
  std::vector<OcsSetting> settings;  // one per OCS, ordered by id

  SliceShape chip_shape() const { return block_grid.scaled(kBlockEdge); }
  bool operator==(const CrossConnect&) const = default;
};

CrossConnect configure_slice(const CablingPlan& plan, std::span<const int> blocks,
                             const SliceShape& block_grid, const TwistSpec& twist);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> diagnostics;

  explicit operator bool() const { return ok; }
  void fail(std::string message) {
    ok = false;
    diagnostics.push_back(std::move(message));
  }
};

/// Checks every OCS setting is 1:1 over ports present in the plan, then
/// compares the induced chip graph (intra-block meshes plus switched links,
/// in canonical slice coordinates) with build_topology(chip shape, twist).
VerifyResult verify_crossconnect(const CablingPlan& plan, const CrossConnect& xc);

/// Slices configured side by side must not share blocks or OCS ports.
VerifyResult verify_coexisting(const CablingPlan& plan, std::span<const CrossConnect> slices);

/// Undirected chip links induced by a cross-connect, as sorted coordinate
/// pairs (first < second) in slice coordinates.
std::vector<std::pair<Coord, Coord>> induced_links(const CablingPlan& plan,
                                                   const CrossConnect& xc);

std::string to_json(const CablingPlan& plan);
std::string to_json(const CrossConnect& xc);
CablingPlan cabling_plan_from_json(const std::string& text);
CrossConnect crossconnect_from_json(const std::string& text);

}  // namespace torusforge::ocs

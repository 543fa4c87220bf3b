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

#include "torusforge/ocs_fabric.hpp"

#include <algorithm>
#include <cstdlib>
#include <iterator>
#include <map>
#include <set>

#include "json.hpp"
#include "torusforge/error.hpp"
#include "torusforge/topology.hpp"

namespace torusforge::ocs {

using nlohmann::json;

namespace {

// Local chip coordinate on the face of `dim` with face index `index`.
Coord face_chip(int dim, int index, int side) {
  Coord c;
  c[dim] = side;
  int a = dim == 0 ? 1 : 0;
  int b = dim == 2 ? 1 : 2;
  c[a] = index / kBlockEdge;
  c[b] = index % kBlockEdge;
  return c;
}

int grid_position(const SliceShape& grid, const Coord& g) {
  return (g.x * grid.y + g.y) * grid.z + g.z;
}

Coord grid_coord(const SliceShape& grid, int position) {
  Coord g;
  g.z = position % grid.z;
  position /= grid.z;
  g.y = position % grid.y;
  g.x = position / grid.y;
  return g;
}

Coord add(const Coord& a, const Coord& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

Coord block_origin(const SliceShape& grid, int position) {
  Coord g = grid_coord(grid, position);
  return {g.x * kBlockEdge, g.y * kBlockEdge, g.z * kBlockEdge};
}

std::pair<Coord, Coord> ordered(const Coord& a, const Coord& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

void check_slice_blocks(const CablingPlan& plan, std::span<const int> blocks,
                        const SliceShape& grid) {
  if (!grid.positive()) throw ValidationError("block grid dimensions must be positive");
  if (static_cast<std::int64_t>(blocks.size()) != grid.chips()) {
    throw ValidationError("block grid " + grid.to_string() + " needs " +
                          std::to_string(grid.chips()) + " blocks, got " +
                          std::to_string(blocks.size()));
  }
  std::set<int> seen;
  for (int b : blocks) {
    if (!plan.contains_block(b)) {
      throw ValidationError("block " + std::to_string(b) + " is not in the cabling plan");
    }
    if (!seen.insert(b).second) {
      throw ValidationError("block " + std::to_string(b) + " listed twice");
    }
  }
}

}  // namespace

RackPosition rack_position(int block) {
  return {block / kRackGridColumns, block % kRackGridColumns};
}

int face_index(int dim, const Coord& local) {
  int a = dim == 0 ? 1 : 0;
  int b = dim == 2 ? 1 : 2;
  return local[a] * kBlockEdge + local[b];
}

CablingPlan::CablingPlan(int n_blocks) : n_blocks_(n_blocks) {
  if (n_blocks < 1 || n_blocks > kMaxBlocks) {
    throw ValidationError("machine size must be 1.." + std::to_string(kMaxBlocks) +
                          " blocks, got " + std::to_string(n_blocks));
  }
  assignments_.reserve(static_cast<std::size_t>(n_blocks) * kFiberPairsPerBlock);
  for (int block = 0; block < n_blocks; ++block) {
    for (int dim = 0; dim < kDims; ++dim) {
      for (int index = 0; index < kLinksPerFace; ++index) {
        assignments_.push_back(
            {block, dim, index, ocs_for(dim, index), plus_port(block), minus_port(block)});
      }
    }
  }
}

const CableAssignment& CablingPlan::at(int block, int dim, int index) const {
  if (!contains_block(block) || dim < 0 || dim >= kDims || index < 0 ||
      index >= kLinksPerFace) {
    throw ValidationError("no cable for block " + std::to_string(block));
  }
  return assignments_[static_cast<std::size_t>(block) * kFiberPairsPerBlock +
                      dim * kLinksPerFace + index];
}

int CablingPlan::used_ports(int ocs) const {
  if (ocs < 0 || ocs >= kOcsCount) throw ValidationError("OCS id out of range");
  // Each block contributes one fiber pair (two ports) to every OCS.
  return 2 * n_blocks_;
}

CablingPlan plan_cabling(int n_blocks) { return CablingPlan(n_blocks); }

CrossConnect configure_slice(const CablingPlan& plan, std::span<const int> blocks,
                             const SliceShape& block_grid, const TwistSpec& twist) {
  check_slice_blocks(plan, blocks, block_grid);
  const SliceShape chips = block_grid.scaled(kBlockEdge);
  if (twist.twisted()) {
    if (!is_twistable(chips)) {
      throw ValidationError("twist invalid for chip shape " + chips.to_string());
    }
    for (const auto& s : twist.skews) {
      if (s.amount % kBlockEdge != 0) {
        throw ValidationError("skew " + twist.to_string() +
                              " is not a whole number of blocks; OCS cannot realize it");
      }
    }
  }
  // The chip-level torus supplies the (skewed) wraparound reduction.
  const InterconnectGraph target = build_torus(chips, twist);

  CrossConnect xc;
  xc.blocks.assign(blocks.begin(), blocks.end());
  xc.block_grid = block_grid;
  xc.twist = twist;
  xc.settings.resize(kOcsCount);
  for (int ocs = 0; ocs < kOcsCount; ++ocs) xc.settings[ocs].ocs = ocs;

  for (int pos = 0; pos < static_cast<int>(blocks.size()); ++pos) {
    const Coord origin = block_origin(block_grid, pos);
    for (int dim = 0; dim < kDims; ++dim) {
      for (int index = 0; index < kLinksPerFace; ++index) {
        Coord from = add(origin, face_chip(dim, index, kBlockEdge - 1));
        Coord step = from;
        step[dim] += 1;
        const Coord to = target.reduce(step);
        Coord to_block{to.x / kBlockEdge, to.y / kBlockEdge, to.z / kBlockEdge};
        Coord to_local{to.x % kBlockEdge, to.y % kBlockEdge, to.z % kBlockEdge};
        if (to_local[dim] != 0 || face_index(dim, to_local) != index) {
          throw ValidationError("twist " + twist.to_string() +
                                " cannot be realized without recabling");
        }
        const int peer = blocks[grid_position(block_grid, to_block)];
        const auto& cable_from = plan.at(blocks[pos], dim, index);
        const auto& cable_to = plan.at(peer, dim, index);
        xc.settings[cable_from.ocs].connections.emplace_back(cable_from.plus_port,
                                                             cable_to.minus_port);
      }
    }
  }
  for (auto& s : xc.settings) std::sort(s.connections.begin(), s.connections.end());
  return xc;
}

std::vector<std::pair<Coord, Coord>> induced_links(const CablingPlan& plan,
                                                   const CrossConnect& xc) {
  std::map<int, int> position_of;
  for (int pos = 0; pos < static_cast<int>(xc.blocks.size()); ++pos) {
    position_of[xc.blocks[pos]] = pos;
  }
  std::set<std::pair<Coord, Coord>> links;
  // Electrical 4x4x4 mesh inside every block.
  for (int pos = 0; pos < static_cast<int>(xc.blocks.size()); ++pos) {
    const Coord origin = block_origin(xc.block_grid, pos);
    for (int x = 0; x < kBlockEdge; ++x) {
      for (int y = 0; y < kBlockEdge; ++y) {
        for (int z = 0; z < kBlockEdge; ++z) {
          const Coord local{x, y, z};
          for (int d = 0; d < kDims; ++d) {
            if (local[d] + 1 >= kBlockEdge) continue;
            Coord next = local;
            next[d] += 1;
            links.insert(ordered(add(origin, local), add(origin, next)));
          }
        }
      }
    }
  }
  // Optical links switched by the OCSes.
  for (const auto& setting : xc.settings) {
    if (setting.ocs < 0 || setting.ocs >= kOcsCount) continue;
    const int dim = setting.ocs / kLinksPerFace;
    const int index = setting.ocs % kLinksPerFace;
    for (auto [in, out] : setting.connections) {
      if (!plan.is_plus_port(in) || !plan.is_minus_port(out)) continue;
      auto a = position_of.find(in / 2);
      auto b = position_of.find(out / 2);
      if (a == position_of.end() || b == position_of.end()) continue;
      const Coord ca = add(block_origin(xc.block_grid, a->second),
                           face_chip(dim, index, kBlockEdge - 1));
      const Coord cb = add(block_origin(xc.block_grid, b->second), face_chip(dim, index, 0));
      if (ca != cb) links.insert(ordered(ca, cb));
    }
  }
  return {links.begin(), links.end()};
}

VerifyResult verify_crossconnect(const CablingPlan& plan, const CrossConnect& xc) {
  VerifyResult result;
  try {
    check_slice_blocks(plan, xc.blocks, xc.block_grid);
  } catch (const ValidationError& e) {
    result.fail(e.what());
    return result;
  }
  const std::set<int> members(xc.blocks.begin(), xc.blocks.end());

  std::set<int> seen_ocs;
  for (const auto& setting : xc.settings) {
    const std::string where = "OCS " + std::to_string(setting.ocs);
    if (setting.ocs < 0 || setting.ocs >= kOcsCount) {
      result.fail(where + ": id out of range");
      continue;
    }
    if (!seen_ocs.insert(setting.ocs).second) result.fail(where + ": listed twice");
    std::set<int> inputs;
    std::set<int> outputs;
    for (auto [in, out] : setting.connections) {
      const bool input_reused = !inputs.insert(in).second;
      const bool output_reused = !outputs.insert(out).second;
      if (input_reused || output_reused) {
        result.fail(where + ": connections not 1:1 (port " +
                    std::to_string(input_reused ? in : out) + " reused)");
      }
      if (!plan.is_plus_port(in) || !plan.is_minus_port(out)) {
        result.fail(where + ": connection " + std::to_string(in) + "->" + std::to_string(out) +
                    " uses a port outside the cabling plan");
      } else if (!members.count(in / 2) || !members.count(out / 2)) {
        result.fail(where + ": connection " + std::to_string(in) + "->" + std::to_string(out) +
                    " reaches a block outside the slice");
      }
    }
    if (static_cast<int>(inputs.size()) > kOcsUsablePorts / 2) {
      result.fail(where + ": more connections than usable ports");
    }
  }
  if (!result.ok) return result;

  std::vector<std::pair<Coord, Coord>> expected;
  try {
    const InterconnectGraph target = build_topology(xc.chip_shape(), xc.twist);
    for (const auto& link : target.links()) {
      if (link.src < link.dst) {
        expected.push_back(ordered(target.coord(link.src), target.coord(link.dst)));
      }
    }
    std::sort(expected.begin(), expected.end());
  } catch (const ValidationError& e) {
    result.fail(std::string("target topology invalid: ") + e.what());
    return result;
  }

  const auto actual = induced_links(plan, xc);
  std::vector<std::pair<Coord, Coord>> missing;
  std::vector<std::pair<Coord, Coord>> extra;
  std::set_difference(expected.begin(), expected.end(), actual.begin(), actual.end(),
                      std::back_inserter(missing));
  std::set_difference(actual.begin(), actual.end(), expected.begin(), expected.end(),
                      std::back_inserter(extra));
  constexpr std::size_t kReportLimit = 8;
  auto is_wraparound = [](const std::pair<Coord, Coord>& l) {
    for (int d = 0; d < kDims; ++d) {
      if (std::abs(l.first[d] - l.second[d]) > 1) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < missing.size() && i < kReportLimit; ++i) {
    result.fail(std::string(is_wraparound(missing[i]) ? "missing wraparound link "
                                                      : "missing link ") +
                missing[i].first.to_string() + " <-> " + missing[i].second.to_string());
  }
  for (std::size_t i = 0; i < extra.size() && i < kReportLimit; ++i) {
    result.fail("unexpected link " + extra[i].first.to_string() + " <-> " +
                extra[i].second.to_string());
  }
  if (missing.size() + extra.size() > 2 * kReportLimit) {
    result.diagnostics.push_back(std::to_string(missing.size()) + " missing and " +
                                 std::to_string(extra.size()) + " unexpected links in total");
  }
  return result;
}

VerifyResult verify_coexisting(const CablingPlan& plan, std::span<const CrossConnect> slices) {
  VerifyResult result;
  std::map<int, std::size_t> block_owner;
  std::map<std::pair<int, int>, std::size_t> port_owner;
  for (std::size_t s = 0; s < slices.size(); ++s) {
    VerifyResult single = verify_crossconnect(plan, slices[s]);
    for (auto& d : single.diagnostics) result.fail("slice " + std::to_string(s) + ": " + d);
    for (int b : slices[s].blocks) {
      auto [it, fresh] = block_owner.emplace(b, s);
      if (!fresh) {
        result.fail("block " + std::to_string(b) + " shared by slices " +
                    std::to_string(it->second) + " and " + std::to_string(s));
      }
    }
    for (const auto& setting : slices[s].settings) {
      for (auto [in, out] : setting.connections) {
        for (int port : {in, out}) {
          auto [it, fresh] = port_owner.emplace(std::pair{setting.ocs, port}, s);
          if (!fresh && it->second != s) {
            result.fail("port conflict on OCS " + std::to_string(setting.ocs) + " port " +
                        std::to_string(port) + " between slices " +
                        std::to_string(it->second) + " and " + std::to_string(s));
          }
        }
      }
    }
  }
  return result;
}

namespace {

json twist_to_json(const TwistSpec& twist) {
  json skews = json::array();
  for (const auto& s : twist.skews) {
    skews.push_back({{"wrap_dim", dim_name(s.wrap_dim)},
                     {"target_dim", dim_name(s.target_dim)},
                     {"amount", s.amount}});
  }
  return skews;
}

TwistSpec twist_from_json(const json& j) {
  TwistSpec t;
  for (const auto& s : j) {
    t.skews.push_back({parse_dim(s.at("wrap_dim").get<std::string>()),
                       parse_dim(s.at("target_dim").get<std::string>()),
                       s.at("amount").get<int>()});
  }
  return t;
}

json shape_to_json(const SliceShape& s) { return json::array({s.x, s.y, s.z}); }

SliceShape shape_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("shape must be [x, y, z]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

template <class Fn>
auto parse_document(const std::string& text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

std::string to_json(const CablingPlan& plan) {
  json assignments = json::array();
  for (const auto& a : plan.assignments()) {
    assignments.push_back({{"block", a.block},
                           {"dim", dim_name(a.dim)},
                           {"index", a.index},
                           {"ocs", a.ocs},
                           {"plus_port", a.plus_port},
                           {"minus_port", a.minus_port}});
  }
  json ocs = json::array();
  for (int id = 0; id < plan.ocs_count(); ++id) {
    ocs.push_back({{"id", id},
                   {"used_ports", plan.used_ports(id)},
                   {"free_ports", plan.free_ports(id)},
                   {"spare_ports", plan.spare_ports(id)}});
  }
  json doc = {{"n_blocks", plan.n_blocks()},
              {"ocs_count", plan.ocs_count()},
              {"ports_per_ocs", kOcsPorts},
              {"usable_ports_per_ocs", kOcsUsablePorts},
              {"total_fiber_pairs", plan.total_fiber_pairs()},
              {"total_used_ports", plan.total_used_ports()},
              {"ocs", ocs},
              {"assignments", assignments}};
  return doc.dump();
}

std::string to_json(const CrossConnect& xc) {
  json settings = json::array();
  for (const auto& s : xc.settings) {
    json conns = json::array();
    for (auto [in, out] : s.connections) conns.push_back(json::array({in, out}));
    settings.push_back({{"id", s.ocs}, {"connections", conns}});
  }
  json doc = {{"blocks", xc.blocks},
              {"block_grid", shape_to_json(xc.block_grid)},
              {"chip_shape", shape_to_json(xc.chip_shape())},
              {"twist", twist_to_json(xc.twist)},
              {"ocs", settings}};
  return doc.dump();
}

CablingPlan cabling_plan_from_json(const std::string& text) {
  return parse_document(text, [](const json& doc) {
    CablingPlan plan(doc.at("n_blocks").get<int>());
    const auto& rows = doc.at("assignments");
    if (rows.size() != plan.assignments().size()) {
      throw ValidationError("assignment count does not match n_blocks");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      CableAssignment a{r.at("block").get<int>(),       parse_dim(r.at("dim").get<std::string>()),
                        r.at("index").get<int>(),       r.at("ocs").get<int>(),
                        r.at("plus_port").get<int>(),   r.at("minus_port").get<int>()};
      if (!(a == plan.assignments()[i])) {
        throw ValidationError("assignment " + std::to_string(i) +
                              " deviates from the standard cabling");
      }
    }
    return plan;
  });
}

CrossConnect crossconnect_from_json(const std::string& text) {
  return parse_document(text, [](const json& doc) {
    CrossConnect xc;
    xc.blocks = doc.at("blocks").get<std::vector<int>>();
    xc.block_grid = shape_from_json(doc.at("block_grid"));
    xc.twist = twist_from_json(doc.at("twist"));
    for (const auto& s : doc.at("ocs")) {
      OcsSetting setting;
      setting.ocs = s.at("id").get<int>();
      for (const auto& c : s.at("connections")) {
        setting.connections.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
      }
      xc.settings.push_back(std::move(setting));
    }
    return xc;
  });
}

}  // namespace torusforge::ocs

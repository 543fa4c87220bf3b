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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "torusforge/shape.hpp"

namespace torusforge {

/// TPU v4 ICI link rate, bytes/s per direction.
inline constexpr double kDefaultLinkBandwidth = 50e9;

enum class Wiring { torus, mesh };

struct Link {
  int src = 0;
  int dst = 0;
  double bandwidth = kDefaultLinkBandwidth;
};

/// Chips and directed links of a torus, twisted torus, or mesh.
///
/// Nodes are indexed row-major, (x * Y + y) * Z + z. Every undirected link is
/// stored as two directed links of equal bandwidth; parallel links are never
/// emitted (a length-2 ring has a single link per node pair). Immutable once
/// built.
class InterconnectGraph {
 public:
  InterconnectGraph(SliceShape shape, TwistSpec twist, Wiring wiring, double link_bandwidth);

  const SliceShape& shape() const { return shape_; }
  const TwistSpec& twist() const { return twist_; }
  Wiring wiring() const { return wiring_; }
  bool is_mesh() const { return wiring_ == Wiring::mesh; }
  // Tori (twisted or not) are lattice graphs, hence vertex-transitive.
  bool vertex_transitive() const { return wiring_ == Wiring::torus; }

  int node_count() const { return static_cast<int>(shape_.chips()); }
  Coord coord(int node) const;
  int index(const Coord& c) const;

  std::span<const Link> links() const { return links_; }
  std::span<const int> out_links(int node) const {
    return {out_ids_.data() + out_offsets_[node],
            out_ids_.data() + out_offsets_[node + 1]};
  }
  int out_degree(int node) const { return out_offsets_[node + 1] - out_offsets_[node]; }
  std::size_t undirected_link_count() const { return links_.size() / 2; }

  /// Directed link id for src -> dst, or -1.
  int find_link(int src, int dst) const;

  /// Node reached from `node` by adding the coordinate vector of `by`,
  /// reduced through the (possibly skewed) wraparounds. Tori only.
  int translate(int node, int by) const;

  /// Reduces an unbounded lattice point onto the torus.
  Coord reduce(Coord p) const;

 private:
  SliceShape shape_;
  TwistSpec twist_;
  Wiring wiring_;
  std::vector<Link> links_;
  std::vector<int> out_offsets_;
  std::vector<int> out_ids_;
};

/// Block-granular shapes become tori (twist applied to wraparounds); shapes
/// that fit inside one block become meshes. Twisting requires a twistable
/// sorted shape. Throws ValidationError otherwise.
InterconnectGraph build_topology(const SliceShape& shape, const TwistSpec& twist,
                                 double link_bandwidth = kDefaultLinkBandwidth);

/// Unvalidated builders for analysis shapes such as rings (1,1,k) and 2D tori
/// (1,y,z). Skews are still checked for consistency.
InterconnectGraph build_torus(const SliceShape& shape, const TwistSpec& twist = {},
                              double link_bandwidth = kDefaultLinkBandwidth);
InterconnectGraph build_mesh(const SliceShape& shape,
                             double link_bandwidth = kDefaultLinkBandwidth);

/// Hop distances from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const InterconnectGraph& graph, int source);

struct PathMetrics {
  int diameter = 0;
  double mean_distance = 0.0;  // over ordered pairs s != t
};

/// Exact BFS metrics. Throws ValidationError on a disconnected graph.
PathMetrics path_metrics(const InterconnectGraph& graph, unsigned threads = 0);

/// Fewest links crossing an axis-aligned balanced cut of a torus.
///
/// Regular tori use the closed form min_d (L_d == 2 ? 1 : 2) * prod(L_other)
/// over even-length dimensions; twisted tori count crossings of the actual
/// link set over every cyclic half-window of every even-length dimension.
/// Shapes that would be wired as a sub-block mesh with a dimension >= 3 are
/// rejected unless twisted (use axis_cut_bisection_mesh).
std::int64_t axis_cut_bisection(const SliceShape& shape, const TwistSpec& twist);
std::int64_t axis_cut_bisection_mesh(const SliceShape& shape);

/// Exhaustive minimum balanced bipartition (undirected links). Node count
/// must be <= 20.
std::int64_t min_bisection_exact(const InterconnectGraph& graph);

struct LinkLoadMap {
  std::vector<double> load;             // bytes, indexed by directed link id
  double max_load = 0.0;
  double total_load = 0.0;              // sum of `load`
  double distance_weighted_traffic = 0.0;  // sum over pairs of bytes * hops
};

enum class LoadMethod {
  automatic,   // symmetric for vertex-transitive graphs above 512 nodes
  exhaustive,  // one flow computation per destination
  symmetric,   // one destination, replicated by lattice translation
};

struct LoadOptions {
  LoadMethod method = LoadMethod::automatic;
  unsigned threads = 0;
};

/// Uniform all-to-all of `bytes_per_pair` between every ordered pair, routed
/// minimally: at each node the flow toward a destination splits evenly over
/// every outgoing edge of the shortest-path DAG. Results are bit-identical for
/// any thread count.
LinkLoadMap all_to_all_link_loads(const InterconnectGraph& graph, double bytes_per_pair,
                                  const LoadOptions& options = {});

/// Header line plus one "sx,sy,sz -> dx,dy,dz bw=<bytes/s>" line per
/// directed link.
std::string to_edge_list(const InterconnectGraph& graph);

}  // namespace torusforge

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

#include "torusforge/topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "torusforge/error.hpp"
#include "torusforge/parallel.hpp"

namespace torusforge {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Destinations (or translations) per work item. Fixed so the merge order
// never depends on the thread count.
constexpr std::size_t kLoadChunk = 32;

}  // namespace

InterconnectGraph::InterconnectGraph(SliceShape shape, TwistSpec twist, Wiring wiring,
                                     double link_bandwidth)
    : shape_(shape), twist_(std::move(twist)), wiring_(wiring) {
  if (!shape_.positive()) throw ValidationError("shape dimensions must be positive");
  if (!(link_bandwidth > 0.0)) throw ValidationError("link bandwidth must be positive");
  if (wiring_ == Wiring::mesh && twist_.twisted()) {
    throw ValidationError("a mesh has no wraparound links to twist");
  }
  check_twist(shape_, twist_);

  const int n = node_count();
  std::vector<std::vector<int>> neighbors(n);
  auto connected = [&](int a, int b) {
    return std::find(neighbors[a].begin(), neighbors[a].end(), b) != neighbors[a].end();
  };
  for (int node = 0; node < n; ++node) {
    const Coord c = coord(node);
    for (int d = 0; d < kDims; ++d) {
      if (shape_[d] < 2) continue;
      Coord next = c;
      next[d] += 1;
      if (wiring_ == Wiring::mesh) {
        if (next[d] >= shape_[d]) continue;
      } else {
        next = reduce(next);
      }
      const int other = index(next);
      if (other == node || connected(node, other)) continue;
      neighbors[node].push_back(other);
      neighbors[other].push_back(node);
    }
  }

  out_offsets_.assign(n + 1, 0);
  for (int node = 0; node < n; ++node) {
    std::sort(neighbors[node].begin(), neighbors[node].end());
    out_offsets_[node + 1] = out_offsets_[node] + static_cast<int>(neighbors[node].size());
  }
  links_.reserve(out_offsets_[n]);
  out_ids_.reserve(out_offsets_[n]);
  for (int node = 0; node < n; ++node) {
    for (int other : neighbors[node]) {
      out_ids_.push_back(static_cast<int>(links_.size()));
      links_.push_back({node, other, link_bandwidth});
    }
  }
}

Coord InterconnectGraph::coord(int node) const {
  Coord c;
  c.z = node % shape_.z;
  node /= shape_.z;
  c.y = node % shape_.y;
  c.x = node / shape_.y;
  return c;
}

int InterconnectGraph::index(const Coord& c) const {
  return (c.x * shape_.y + c.y) * shape_.z + c.z;
}

Coord InterconnectGraph::reduce(Coord p) const {
  for (int d = 0; d < kDims; ++d) {
    const int wraps = floor_div(p[d], shape_[d]);
    if (wraps == 0) continue;
    p[d] -= wraps * shape_[d];
    for (const auto& s : twist_.skews) {
      if (s.wrap_dim == d) p[s.target_dim] += wraps * s.amount;
    }
  }
  return p;
}

int InterconnectGraph::find_link(int src, int dst) const {
  for (int id : out_links(src)) {
    if (links_[id].dst == dst) return id;
  }
  return -1;
}

int InterconnectGraph::translate(int node, int by) const {
  if (wiring_ != Wiring::torus) throw ValidationError("translation is defined on tori only");
  const Coord a = coord(node);
  const Coord b = coord(by);
  return index(reduce({a.x + b.x, a.y + b.y, a.z + b.z}));
}

InterconnectGraph build_topology(const SliceShape& shape, const TwistSpec& twist,
                                 double link_bandwidth) {
  if (!shape.positive()) throw ValidationError("shape dimensions must be positive");
  if (shape.is_block_granular()) {
    if (twist.twisted() && !is_twistable(shape)) {
      throw ValidationError("twist requested on non-twistable shape " + shape.to_string());
    }
    return InterconnectGraph(shape, twist, Wiring::torus, link_bandwidth);
  }
  if (!shape.fits_in_block()) {
    throw ValidationError("invalid shape " + shape.to_string() +
                          ": dimensions above 4 must be multiples of 4");
  }
  if (twist.twisted()) {
    throw ValidationError("twist requested on sub-block mesh " + shape.to_string());
  }
  return InterconnectGraph(shape, twist, Wiring::mesh, link_bandwidth);
}

InterconnectGraph build_torus(const SliceShape& shape, const TwistSpec& twist,
                              double link_bandwidth) {
  return InterconnectGraph(shape, twist, Wiring::torus, link_bandwidth);
}

InterconnectGraph build_mesh(const SliceShape& shape, double link_bandwidth) {
  return InterconnectGraph(shape, {}, Wiring::mesh, link_bandwidth);
}

std::vector<int> bfs_distances(const InterconnectGraph& graph, int source) {
  std::vector<int> dist(graph.node_count(), -1);
  std::vector<int> frontier{source};
  dist[source] = 0;
  const auto links = graph.links();
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const int u = frontier[head];
    for (int id : graph.out_links(u)) {
      const int v = links[id].dst;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

PathMetrics path_metrics(const InterconnectGraph& graph, unsigned threads) {
  const int n = graph.node_count();
  if (n == 1) return {};
  // One source suffices on a vertex-transitive graph.
  const int sources = graph.vertex_transitive() ? 1 : n;
  struct Partial {
    int diameter = 0;
    std::int64_t sum = 0;
    bool disconnected = false;
  };
  const std::size_t chunks = (static_cast<std::size_t>(sources) + kLoadChunk - 1) / kLoadChunk;
  std::vector<Partial> partial(chunks);
  parallel_for_chunks(chunks, threads, [&](std::size_t c) {
    Partial& p = partial[c];
    const int end = std::min<int>(sources, static_cast<int>((c + 1) * kLoadChunk));
    for (int s = static_cast<int>(c * kLoadChunk); s < end; ++s) {
      for (int d : bfs_distances(graph, s)) {
        if (d < 0) {
          p.disconnected = true;
          continue;
        }
        p.diameter = std::max(p.diameter, d);
        p.sum += d;
      }
    }
  });
  PathMetrics m;
  std::int64_t total = 0;
  for (const auto& p : partial) {
    if (p.disconnected) throw ValidationError("graph is disconnected");
    m.diameter = std::max(m.diameter, p.diameter);
    total += p.sum;
  }
  m.mean_distance = static_cast<double>(total) / (static_cast<double>(sources) * (n - 1));
  return m;
}

namespace {

bool wired_as_mesh(const SliceShape& shape) {
  const SliceShape s = shape.sorted();
  const bool sub_block = s.fits_in_block() && s.chips() < 64;
  return sub_block && s.z >= 3;
}

std::int64_t closed_form_cut(const SliceShape& shape, std::int64_t per_column) {
  std::int64_t best = -1;
  std::int64_t fallback = -1;
  for (int d = 0; d < kDims; ++d) {
    if (shape[d] < 2) continue;
    std::int64_t columns = shape.chips() / shape[d];
    std::int64_t crossing = (shape[d] == 2 ? 1 : per_column) * columns;
    if (shape[d] % 2 == 0) {
      best = best < 0 ? crossing : std::min(best, crossing);
    } else {
      // Odd rings admit no exactly balanced axis cut; report the near-balanced one.
      fallback = fallback < 0 ? crossing : std::min(fallback, crossing);
    }
  }
  if (best >= 0) return best;
  return fallback < 0 ? 0 : fallback;
}

}  // namespace

std::int64_t axis_cut_bisection(const SliceShape& shape, const TwistSpec& twist) {
  if (!shape.positive()) throw ValidationError("shape dimensions must be positive");
  if (!twist.twisted() && wired_as_mesh(shape)) {
    throw ValidationError("shape " + shape.to_string() +
                          " is wired as a mesh; use the mesh axis cut");
  }
  if (!twist.twisted()) return closed_form_cut(shape, 2);

  const InterconnectGraph graph = build_torus(shape, twist);
  std::int64_t best = -1;
  for (int d = 0; d < kDims; ++d) {
    const int len = shape[d];
    if (len < 2 || len % 2 != 0) continue;
    for (int offset = 0; offset < len / 2; ++offset) {
      auto inside = [&](int node) {
        int c = graph.coord(node)[d] - offset;
        if (c < 0) c += len;
        return c < len / 2;
      };
      std::int64_t crossing = 0;
      for (const auto& link : graph.links()) {
        if (link.src < link.dst && inside(link.src) != inside(link.dst)) ++crossing;
      }
      best = best < 0 ? crossing : std::min(best, crossing);
    }
  }
  if (best < 0) throw ValidationError("twisted shape has no even-length dimension to cut");
  return best;
}

std::int64_t axis_cut_bisection_mesh(const SliceShape& shape) {
  if (!shape.positive()) throw ValidationError("shape dimensions must be positive");
  return closed_form_cut(shape, 1);
}

std::int64_t min_bisection_exact(const InterconnectGraph& graph) {
  const int n = graph.node_count();
  if (n > 20) {
    throw ValidationError("exhaustive bisection supports at most 20 nodes, got " +
                          std::to_string(n));
  }
  if (n < 2) return 0;
  std::vector<std::pair<int, int>> edges;
  for (const auto& link : graph.links()) {
    if (link.src < link.dst) edges.emplace_back(link.src, link.dst);
  }
  auto cut_size = [&](std::uint32_t mask) {
    std::int64_t c = 0;
    for (auto [u, v] : edges) c += ((mask >> u) ^ (mask >> v)) & 1u;
    return c;
  };
  // For even n pin node 0 to the first side; each bipartition is seen once.
  const bool pin = n % 2 == 0;
  const int free_bits = pin ? n - 1 : n;
  const int choose = pin ? n / 2 - 1 : n / 2;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  auto visit = [&](std::uint32_t bits) {
    std::uint32_t mask = pin ? (bits << 1) | 1u : bits;
    best = std::min(best, cut_size(mask));
  };
  if (choose == 0) {
    visit(0);
    return best;
  }
  const std::uint32_t limit = 1u << free_bits;
  for (std::uint32_t bits = (1u << choose) - 1; bits < limit;) {
    visit(bits);
    // Gosper's hack: next integer with the same popcount.
    const std::uint32_t low = bits & (~bits + 1);
    const std::uint32_t ripple = bits + low;
    bits = (((ripple ^ bits) >> 2) / low) | ripple;
  }
  return best;
}

namespace {

// Accumulates the minimal-routing flow toward `dest` from every other node,
// each sending `bytes` and splitting evenly over shortest-path next hops.
void accumulate_flow_to(const InterconnectGraph& graph, int dest, double bytes,
                        std::vector<double>& load, double& weighted) {
  const int n = graph.node_count();
  const auto links = graph.links();
  const std::vector<int> dist = bfs_distances(graph, dest);
  int max_dist = 0;
  for (int d : dist) {
    if (d < 0) throw ValidationError("graph is disconnected");
    max_dist = std::max(max_dist, d);
  }
  std::vector<std::vector<int>> layers(max_dist + 1);
  for (int v = 0; v < n; ++v) layers[dist[v]].push_back(v);

  std::vector<double> flow(n, bytes);
  flow[dest] = 0.0;
  int next_hops[2 * kDims + 8];
  for (int layer = max_dist; layer > 0; --layer) {
    for (int v : layers[layer]) {
      weighted += bytes * layer;
      int count = 0;
      for (int id : graph.out_links(v)) {
        if (dist[links[id].dst] == layer - 1) next_hops[count++] = id;
      }
      const double share = flow[v] / count;
      for (int i = 0; i < count; ++i) {
        load[next_hops[i]] += share;
        flow[links[next_hops[i]].dst] += share;
      }
    }
  }
}

}  // namespace

LinkLoadMap all_to_all_link_loads(const InterconnectGraph& graph, double bytes_per_pair,
                                  const LoadOptions& options) {
  if (bytes_per_pair < 0.0) throw ValidationError("bytes per pair must be non-negative");
  const int n = graph.node_count();
  const std::size_t n_links = graph.links().size();

  LoadMethod method = options.method;
  if (method == LoadMethod::automatic) {
    method = graph.vertex_transitive() && n > 512 ? LoadMethod::symmetric
                                                  : LoadMethod::exhaustive;
  }
  if (method == LoadMethod::symmetric && !graph.vertex_transitive()) {
    throw ValidationError("symmetric load computation requires a vertex-transitive graph");
  }

  LinkLoadMap result;
  result.load.assign(n_links, 0.0);
  const std::size_t chunks = (static_cast<std::size_t>(n) + kLoadChunk - 1) / kLoadChunk;
  std::vector<std::vector<double>> partial(chunks);
  std::vector<double> partial_weighted(chunks, 0.0);

  if (method == LoadMethod::exhaustive) {
    parallel_for_chunks(chunks, options.threads, [&](std::size_t c) {
      partial[c].assign(n_links, 0.0);
      const int end = std::min<int>(n, static_cast<int>((c + 1) * kLoadChunk));
      for (int dest = static_cast<int>(c * kLoadChunk); dest < end; ++dest) {
        accumulate_flow_to(graph, dest, bytes_per_pair, partial[c], partial_weighted[c]);
      }
    });
  } else {
    std::vector<double> base(n_links, 0.0);
    double base_weighted = 0.0;
    accumulate_flow_to(graph, 0, bytes_per_pair, base, base_weighted);
    const auto links = graph.links();
    parallel_for_chunks(chunks, options.threads, [&](std::size_t c) {
      partial[c].assign(n_links, 0.0);
      const int end = std::min<int>(n, static_cast<int>((c + 1) * kLoadChunk));
      for (int by = static_cast<int>(c * kLoadChunk); by < end; ++by) {
        for (std::size_t id = 0; id < n_links; ++id) {
          if (base[id] == 0.0) continue;
          const int src = graph.translate(links[id].src, by);
          const int dst = graph.translate(links[id].dst, by);
          partial[c][graph.find_link(src, dst)] += base[id];
        }
        partial_weighted[c] += base_weighted;
      }
    });
  }

  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t id = 0; id < n_links; ++id) result.load[id] += partial[c][id];
    result.distance_weighted_traffic += partial_weighted[c];
  }
  for (double l : result.load) {
    result.total_load += l;
    result.max_load = std::max(result.max_load, l);
  }
  return result;
}

std::string to_edge_list(const InterconnectGraph& graph) {
  std::ostringstream out;
  out << "# torusforge edge-list shape=" << graph.shape().to_string()
      << " twist=" << graph.twist().to_string()
      << " wiring=" << (graph.is_mesh() ? "mesh" : "torus") << " nodes=" << graph.node_count()
      << " links=" << graph.links().size() << '\n';
  out.precision(17);
  for (const auto& link : graph.links()) {
    out << graph.coord(link.src).to_string() << " -> " << graph.coord(link.dst).to_string()
        << " bw=";
    double whole = std::floor(link.bandwidth);
    if (whole == link.bandwidth && link.bandwidth < 9.0e18) {
      out << static_cast<std::int64_t>(whole);
    } else {
      out << link.bandwidth;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace torusforge

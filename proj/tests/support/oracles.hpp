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

// Reference implementations used only by tests. They are deliberately naive
// (dense matrices, per-pair recursion, brute-force enumeration) and share no
// code with the library beyond the public shape types.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "torusforge/shape.hpp"

namespace torusforge::oracle {

struct Graph {
  int n = 0;
  std::vector<std::set<int>> adj;  // undirected, simple
  std::vector<std::array<int, 3>> coords;
};

inline int linear(const SliceShape& s, int x, int y, int z) { return (x * s.y + y) * s.z + z; }

inline int mod(int a, int m) { return ((a % m) + m) % m; }

// One unit step along `dim` in direction `dir`. Crossing the seam of a
// skewed dimension shifts the targets by +-amount; later seams are then
// resolved in dimension order.
inline std::array<int, 3> step(const SliceShape& s, const std::vector<Skew>& skews,
                               std::array<int, 3> p, int dim, int dir) {
  const int len[3] = {s.x, s.y, s.z};
  p[dim] += dir;
  for (int d = 0; d < 3; ++d) {
    while (p[d] >= len[d] || p[d] < 0) {
      const int w = p[d] >= len[d] ? 1 : -1;
      p[d] -= w * len[d];
      for (const auto& k : skews) {
        if (k.wrap_dim == d) p[k.target_dim] += w * k.amount;
      }
    }
  }
  return p;
}

inline Graph torus(const SliceShape& s, const std::vector<Skew>& skews = {}) {
  Graph g;
  g.n = static_cast<int>(s.chips());
  g.adj.resize(g.n);
  g.coords.resize(g.n);
  for (int x = 0; x < s.x; ++x)
    for (int y = 0; y < s.y; ++y)
      for (int z = 0; z < s.z; ++z) {
        const int u = linear(s, x, y, z);
        g.coords[u] = {x, y, z};
        for (int d = 0; d < 3; ++d) {
          if ((d == 0 ? s.x : d == 1 ? s.y : s.z) == 1) continue;
          for (int dir : {-1, 1}) {
            const auto q = step(s, skews, {x, y, z}, d, dir);
            const int v = linear(s, q[0], q[1], q[2]);
            if (v != u) g.adj[u].insert(v);
          }
        }
      }
  return g;
}

inline Graph mesh(const SliceShape& s) {
  Graph g;
  g.n = static_cast<int>(s.chips());
  g.adj.resize(g.n);
  g.coords.resize(g.n);
  for (int x = 0; x < s.x; ++x)
    for (int y = 0; y < s.y; ++y)
      for (int z = 0; z < s.z; ++z) {
        const int u = linear(s, x, y, z);
        g.coords[u] = {x, y, z};
        if (x + 1 < s.x) { g.adj[u].insert(linear(s, x + 1, y, z)); g.adj[linear(s, x + 1, y, z)].insert(u); }
        if (y + 1 < s.y) { g.adj[u].insert(linear(s, x, y + 1, z)); g.adj[linear(s, x, y + 1, z)].insert(u); }
        if (z + 1 < s.z) { g.adj[u].insert(linear(s, x, y, z + 1)); g.adj[linear(s, x, y, z + 1)].insert(u); }
      }
  return g;
}

inline std::size_t undirected_edges(const Graph& g) {
  std::size_t e = 0;
  for (const auto& a : g.adj) e += a.size();
  return e / 2;
}

// Floyd-Warshall hop distances.
inline std::vector<std::vector<int>> all_pairs(const Graph& g) {
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(g.n, std::vector<int>(g.n, kInf));
  for (int u = 0; u < g.n; ++u) {
    d[u][u] = 0;
    for (int v : g.adj[u]) d[u][v] = 1;
  }
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Per-pair minimal routing with an even split over shortest next hops.
// Returns bytes on directed edge (u, v).
inline std::map<std::pair<int, int>, double> pairwise_loads(const Graph& g, double bytes) {
  const auto dist = all_pairs(g);
  std::map<std::pair<int, int>, double> load;
  for (int s = 0; s < g.n; ++s) {
    for (int t = 0; t < g.n; ++t) {
      if (s == t) continue;
      // Layered push from s towards t.
      std::map<int, double> frontier{{s, bytes}};
      while (!frontier.empty()) {
        std::map<int, double> next;
        for (auto [u, f] : frontier) {
          if (u == t) continue;
          std::vector<int> hops;
          for (int v : g.adj[u]) {
            if (dist[v][t] == dist[u][t] - 1) hops.push_back(v);
          }
          for (int v : hops) {
            const double share = f / static_cast<double>(hops.size());
            load[{u, v}] += share;
            next[v] += share;
          }
        }
        frontier.swap(next);
      }
    }
  }
  return load;
}

// Minimum balanced bipartition by enumerating every subset of size n/2.
inline std::int64_t min_bisection(const Graph& g) {
  const int n = g.n;
  const int half = n / 2;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != half) continue;
    std::int64_t cut = 0;
    for (int u = 0; u < n; ++u)
      for (int v : g.adj[u])
        if (u < v && (((mask >> u) & 1u) != ((mask >> v) & 1u))) ++cut;
    best = std::min(best, cut);
  }
  return best;
}

// Every sorted (x, y, z), multiples of 4, with x*y*z == n.
inline std::vector<SliceShape> block_shapes(std::int64_t n) {
  std::vector<SliceShape> out;
  for (std::int64_t x = 4; x <= n; x += 4)
    for (std::int64_t y = x; y <= n; y += 4)
      for (std::int64_t z = y; z <= n; z += 4)
        if (x * y * z == n) out.push_back({int(x), int(y), int(z)});
  return out;
}

// E[floor(H / per_slice)] for H ~ Binomial(blocks, q), by dynamic programming.
inline double binomial_goodput(int blocks, double q, int per_slice) {
  std::vector<double> pmf(blocks + 1, 0.0);
  pmf[0] = 1.0;
  for (int b = 0; b < blocks; ++b) {
    for (int h = b + 1; h >= 1; --h) pmf[h] = pmf[h] * (1.0 - q) + pmf[h - 1] * q;
    pmf[0] *= 1.0 - q;
  }
  double e = 0.0;
  for (int h = 0; h <= blocks; ++h) e += pmf[h] * (h / per_slice);
  return e * per_slice / blocks;
}

}  // namespace torusforge::oracle

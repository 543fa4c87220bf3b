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

#include "torusforge/collectives.hpp"

#include "torusforge/error.hpp"

namespace torusforge::collectives {

namespace {

void check_link(const LinkParams& link) {
  if (!(link.bandwidth > 0.0) || link.links_per_direction < 1) {
    throw ValidationError("link bandwidth must be positive");
  }
}

}  // namespace

std::string_view to_string(Limit limit) {
  switch (limit) {
    case Limit::injection:
      return "injection";
    case Limit::bisection:
      return "bisection";
    case Limit::overhead:
      return "overhead";
  }
  return "?";
}

TimeEstimate allreduce_time(const SliceShape& shape, double bytes, const LinkParams& link,
                            bool wraparound) {
  if (!shape.positive()) throw ValidationError("shape dimensions must be positive");
  if (bytes < 0.0) throw ValidationError("payload must be non-negative");
  check_link(link);
  const std::int64_t n = shape.chips();
  if (n == 1) return {0.0, Limit::injection};
  int active_dims = 0;
  for (int d = 0; d < kDims; ++d) active_dims += shape[d] > 1 ? 1 : 0;
  const int rings = active_dims * (wraparound ? 2 : 1) * link.links_per_direction;
  const double effective = rings * link.bandwidth;
  const double moved = 2.0 * bytes * static_cast<double>(n - 1) / static_cast<double>(n);
  return {moved / effective, Limit::injection};
}

TimeEstimate alltoall_time(const InterconnectGraph& graph, double bytes_per_pair,
                           const LinkParams& link, unsigned threads) {
  check_link(link);
  if (graph.node_count() < 2) throw ValidationError("all-to-all needs at least two nodes");
  const LinkLoadMap loads =
      all_to_all_link_loads(graph, bytes_per_pair, {LoadMethod::automatic, threads});
  return {loads.max_load / (link.bandwidth * link.links_per_direction), Limit::bisection};
}

double alltoall_bisection_bound(const SliceShape& shape, const TwistSpec& twist,
                                double bytes_per_pair, const LinkParams& link) {
  check_link(link);
  const std::int64_t n = shape.chips();
  const double half = static_cast<double>(n / 2);
  const double other_half = static_cast<double>(n - n / 2);
  const double crossing_one_way = half * other_half * bytes_per_pair;
  const auto cut_links = axis_cut_bisection(shape, twist);
  return crossing_one_way / (static_cast<double>(cut_links) * link.bandwidth *
                             link.links_per_direction);
}

double twisted_gain(const SliceShape& shape, unsigned threads) {
  if (!is_twistable(shape)) {
    throw ValidationError("shape " + shape.to_string() + " is not twistable");
  }
  const LinkParams link{};
  const auto regular = build_topology(shape, TwistSpec::none(), link.bandwidth);
  const auto twisted = build_topology(shape, TwistSpec::standard(shape), link.bandwidth);
  const double t_regular = alltoall_time(regular, 1.0, link, threads).seconds;
  const double t_twisted = alltoall_time(twisted, 1.0, link, threads).seconds;
  return t_regular / t_twisted;
}

}  // namespace torusforge::collectives

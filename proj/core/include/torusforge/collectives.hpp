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

#include <string_view>

#include "torusforge/shape.hpp"
#include "torusforge/topology.hpp"

namespace torusforge::collectives {

struct LinkParams {
  double bandwidth = kDefaultLinkBandwidth;  // bytes/s per link per direction
  int links_per_direction = 1;
};

enum class Limit { injection, bisection, overhead };
std::string_view to_string(Limit limit);

struct TimeEstimate {
  double seconds = 0.0;
  Limit limiting = Limit::injection;
};

/// Bandwidth-only multi-dimensional ring all-reduce (reduce-scatter plus
/// all-gather): 2 * bytes * (N - 1) / N over an effective bandwidth of
/// (dims longer than 1) * (2 with wraparound, else 1) * link bandwidth.
TimeEstimate allreduce_time(const SliceShape& shape, double bytes, const LinkParams& link,
                            bool wraparound);

/// Bottleneck-link serialization time of a uniform all-to-all.
TimeEstimate alltoall_time(const InterconnectGraph& graph, double bytes_per_pair,
                           const LinkParams& link, unsigned threads = 0);

/// Cut-based lower bound on a torus all-to-all: traffic crossing the
/// best axis cut in one direction over that cut's links.
double alltoall_bisection_bound(const SliceShape& shape, const TwistSpec& twist,
                                double bytes_per_pair, const LinkParams& link);

/// alltoall_time(regular) / alltoall_time(twisted) for a twistable shape.
double twisted_gain(const SliceShape& shape, unsigned threads = 0);

}  // namespace torusforge::collectives

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

#include <gtest/gtest.h>

#include <random>

#include "torusforge/collectives.hpp"
#include "torusforge/error.hpp"

namespace torusforge::collectives {
namespace {

TEST(AllReduce, ClosedForm) {
  // 8x8x8, 1 GB: 2 * 1e9 * 511/512 over 3 dims * 2 directions * 50 GB/s.
  const auto t = allreduce_time({8, 8, 8}, 1e9, {50e9, 1}, true);
  EXPECT_DOUBLE_EQ(t.seconds, 2.0 * 1e9 * 511.0 / 512.0 / (6 * 50e9));
  EXPECT_EQ(t.limiting, Limit::injection);
  // A ring only drives one dimension.
  EXPECT_DOUBLE_EQ(allreduce_time({1, 1, 16}, 1e9, {50e9, 1}, true).seconds,
                   2.0 * 1e9 * 15.0 / 16.0 / (2 * 50e9));
  EXPECT_EQ(allreduce_time({1, 1, 1}, 1e9, {}, true).seconds, 0.0);
  EXPECT_EQ(allreduce_time({4, 4, 4}, 0.0, {}, true).seconds, 0.0);
}

TEST(AllReduce, WraparoundExactlyHalvesTime) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> bytes(1.0, 1e12);
  for (int i = 0; i < 200; ++i) {
    const SliceShape s{1 + int(rng() % 16), 1 + int(rng() % 16), 2 + int(rng() % 64)};
    const double b = bytes(rng);
    const double off = allreduce_time(s, b, {}, false).seconds;
    const double on = allreduce_time(s, b, {}, true).seconds;
    EXPECT_EQ(off / on, 2.0) << s.to_string();
  }
}

TEST(AllReduce, Errors) {
  EXPECT_THROW(allreduce_time({4, 4, 4}, -1.0, {}, true), ValidationError);
  EXPECT_THROW(allreduce_time({0, 4, 4}, 1.0, {}, true), ValidationError);
  EXPECT_THROW(allreduce_time({4, 4, 4}, 1.0, {0.0, 1}, true), ValidationError);
}

TEST(AllToAll, BottleneckAndBound) {
  const auto regular = build_topology({4, 4, 8}, {});
  const auto t = alltoall_time(regular, 1e6, {50e9, 1});
  EXPECT_EQ(t.limiting, Limit::bisection);
  EXPECT_NEAR(t.seconds, 128.0 * 1e6 / 50e9, 1e-15);
  // Cut bound: 64 * 64 pairs cross 32 links in each direction.
  EXPECT_NEAR(alltoall_bisection_bound({4, 4, 8}, {}, 1e6, {50e9, 1}), 64.0 * 64 * 1e6 / (32 * 50e9),
              1e-15);
  for (SliceShape s : {SliceShape{4, 4, 8}, SliceShape{4, 8, 8}, SliceShape{8, 8, 8}}) {
    for (bool twisted : {false, true}) {
      if (twisted && !is_twistable(s)) continue;
      const TwistSpec tw = twisted ? TwistSpec::standard(s) : TwistSpec::none();
      const auto g = build_topology(s, tw);
      EXPECT_GE(alltoall_time(g, 1.0, {}).seconds * (1 + 1e-12),
                alltoall_bisection_bound(s, tw, 1.0, {}));
    }
  }
  EXPECT_THROW(alltoall_time(build_mesh({1, 1, 1}), 1.0, {}), ValidationError);
}

TEST(TwistedGain, Values) {
  const double g448 = twisted_gain({4, 4, 8});
  const double g488 = twisted_gain({4, 8, 8});
  EXPECT_NEAR(g448, 128.0 / (220.0 / 3.0), 1e-9);
  EXPECT_GE(g448, 1.63);
  EXPECT_GE(g488, 1.31);
  EXPECT_LE(g448, 2.5);
  EXPECT_LE(g488, 2.5);
  for (SliceShape s : {SliceShape{8, 8, 16}, SliceShape{8, 16, 16}}) {
    const double g = twisted_gain(s);
    EXPECT_GT(g, 1.0) << s.to_string();
    EXPECT_LE(g, 2.5) << s.to_string();
  }
  EXPECT_THROW(twisted_gain({4, 4, 4}), ValidationError);
  EXPECT_EQ(twisted_gain({4, 4, 8}, 1), twisted_gain({4, 4, 8}, 16));
}

}  // namespace
}  // namespace torusforge::collectives

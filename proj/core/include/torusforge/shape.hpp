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

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace torusforge {

inline constexpr int kDims = 3;

std::string_view dim_name(int dim);
int parse_dim(std::string_view name);

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;

  int operator[](int d) const { return d == 0 ? x : (d == 1 ? y : z); }
  int& operator[](int d) { return d == 0 ? x : (d == 1 ? y : z); }
  auto operator<=>(const Coord&) const = default;

  std::string to_string() const;
};

/// Chip counts per dimension of a slice.
///
/// The scheduler-facing canonical form is sorted (x <= y <= z); builders also
/// accept unsorted shapes.
struct SliceShape {
  int x = 1;
  int y = 1;
  int z = 1;

  int operator[](int d) const { return d == 0 ? x : (d == 1 ? y : z); }
  int& operator[](int d) { return d == 0 ? x : (d == 1 ? y : z); }
  auto operator<=>(const SliceShape&) const = default;

  std::int64_t chips() const { return std::int64_t{x} * y * z; }
  bool positive() const { return x > 0 && y > 0 && z > 0; }
  bool is_sorted() const { return x <= y && y <= z; }
  bool is_block_granular() const { return x % 4 == 0 && y % 4 == 0 && z % 4 == 0; }
  // Every dimension fits within one 4-chip block edge.
  bool fits_in_block() const { return x <= 4 && y <= 4 && z <= 4; }
  SliceShape sorted() const;
  SliceShape scaled(int factor) const { return {x * factor, y * factor, z * factor}; }

  /// "4x4x8"
  std::string to_string() const;
  /// Accepts "4,4,8" or "4x4x8".
  static SliceShape parse(std::string_view text);
};

/// Wraparound links of `wrap_dim` land `amount` chips further along
/// `target_dim`.
struct Skew {
  int wrap_dim = 0;
  int target_dim = 2;
  int amount = 0;

  auto operator<=>(const Skew&) const = default;
};

struct TwistSpec {
  std::vector<Skew> skews;

  bool twisted() const { return !skews.empty(); }
  bool operator==(const TwistSpec&) const = default;

  static TwistSpec none() { return {}; }

  /// Standard twisted wiring for a twistable shape (n x n x 2n or
  /// n x 2n x 2n, sorted):
  ///   n x n x 2n  : x and y wraparounds skewed by n along z.
  ///   n x 2n x 2n : x wraparound skewed by n along both y and z.
  /// Throws ValidationError for any other shape.
  static TwistSpec standard(const SliceShape& shape);

  /// "none" or "x->z:4,y->z:4"
  std::string to_string() const;
  static TwistSpec parse(std::string_view text);
};

/// n x n x 2n or n x 2n x 2n with n >= 4 and all dims multiples of 4.
/// The shape must be sorted.
bool is_twistable(const SliceShape& shape);

/// Checks skew dims/amounts against the shape. Targets must come after the
/// wrap dimension so lattice reduction can proceed x, y, z.
void check_twist(const SliceShape& shape, const TwistSpec& twist);

}  // namespace torusforge

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

#include "torusforge/shape.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "torusforge/error.hpp"

namespace torusforge {

namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  return text;
}

int parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string_view dim_name(int dim) {
  static constexpr std::string_view kNames[] = {"x", "y", "z"};
  if (dim < 0 || dim >= kDims) throw ValidationError("dimension out of range");
  return kNames[dim];
}

int parse_dim(std::string_view name) {
  if (name == "x") return 0;
  if (name == "y") return 1;
  if (name == "z") return 2;
  throw ValidationError("unknown dimension '" + std::string(name) + "'");
}

std::string Coord::to_string() const {
  return std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z);
}

SliceShape SliceShape::sorted() const {
  std::array<int, 3> d{x, y, z};
  std::sort(d.begin(), d.end());
  return {d[0], d[1], d[2]};
}

std::string SliceShape::to_string() const {
  return std::to_string(x) + "x" + std::to_string(y) + "x" + std::to_string(z);
}

SliceShape SliceShape::parse(std::string_view text) {
  char sep = text.find(',') != std::string_view::npos ? ',' : 'x';
  auto parts = split(text, sep);
  if (parts.size() != 3) {
    throw ValidationError("shape must have three dimensions: '" + std::string(text) + "'");
  }
  SliceShape s{parse_int(parts[0], "shape"), parse_int(parts[1], "shape"),
               parse_int(parts[2], "shape")};
  if (!s.positive()) {
    throw ValidationError("shape dimensions must be positive: '" + std::string(text) + "'");
  }
  return s;
}

bool is_twistable(const SliceShape& s) {
  if (!s.positive() || !s.is_sorted() || !s.is_block_granular()) return false;
  const int n = s.x;
  if (n < 4) return false;
  bool nn2n = s.y == n && s.z == 2 * n;
  bool n2n2n = s.y == 2 * n && s.z == 2 * n;
  return nn2n || n2n2n;
}

TwistSpec TwistSpec::standard(const SliceShape& s) {
  if (!is_twistable(s)) {
    throw ValidationError("shape " + s.to_string() +
                          " is not twistable (needs n x n x 2n or n x 2n x 2n, n >= 4)");
  }
  const int n = s.x;
  TwistSpec t;
  if (s.y == n) {
    t.skews = {{0, 2, n}, {1, 2, n}};
  } else {
    t.skews = {{0, 1, n}, {0, 2, n}};
  }
  return t;
}

std::string TwistSpec::to_string() const {
  if (skews.empty()) return "none";
  std::ostringstream out;
  for (std::size_t i = 0; i < skews.size(); ++i) {
    if (i) out << ',';
    out << dim_name(skews[i].wrap_dim) << "->" << dim_name(skews[i].target_dim) << ':'
        << skews[i].amount;
  }
  return out.str();
}

TwistSpec TwistSpec::parse(std::string_view text) {
  TwistSpec t;
  if (text.empty() || text == "none") return t;
  for (auto item : split(text, ',')) {
    auto arrow = item.find("->");
    auto colon = item.find(':');
    if (arrow == std::string_view::npos || colon == std::string_view::npos || colon < arrow) {
      throw ValidationError("invalid skew '" + std::string(item) + "'");
    }
    Skew s;
    s.wrap_dim = parse_dim(item.substr(0, arrow));
    s.target_dim = parse_dim(item.substr(arrow + 2, colon - arrow - 2));
    s.amount = parse_int(item.substr(colon + 1), "skew amount");
    t.skews.push_back(s);
  }
  return t;
}

void check_twist(const SliceShape& shape, const TwistSpec& twist) {
  for (std::size_t i = 0; i < twist.skews.size(); ++i) {
    const auto& s = twist.skews[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (twist.skews[j].wrap_dim == s.wrap_dim && twist.skews[j].target_dim == s.target_dim) {
        throw ValidationError("duplicate skew " + twist.to_string());
      }
    }
    if (s.wrap_dim < 0 || s.wrap_dim >= kDims || s.target_dim < 0 || s.target_dim >= kDims) {
      throw ValidationError("skew dimension out of range");
    }
    if (s.target_dim <= s.wrap_dim) {
      throw ValidationError("skew target must follow its wrap dimension (x->y, x->z, y->z)");
    }
    const int len = shape[s.target_dim];
    if (s.amount <= 0 || s.amount >= len) {
      throw ValidationError("skew amount " + std::to_string(s.amount) + " outside (0, " +
                            std::to_string(len) + ")");
    }
  }
}

}  // namespace torusforge

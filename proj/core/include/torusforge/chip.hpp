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

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace torusforge {

struct PowerFigures {
  std::optional<double> idle;
  std::optional<double> min;
  std::optional<double> mean;
  std::optional<double> max;
  std::optional<double> tdp;
};

struct ChipSpec {
  std::string name;
  double peak_flops = 0.0;                   // FLOP/s, bf16
  std::optional<double> peak_flops_int8;     // when it differs from bf16
  std::optional<double> hbm_bw;              // bytes/s; absent on HBM-less parts
  std::optional<double> hbm_capacity;        // bytes
  int ici_links = 0;
  double ici_bw = 0.0;                       // bytes/s per link per direction
  PowerFigures power;
  int sparse_cores = 0;
  int chips_per_host = 0;
};

/// Chip definitions keyed by catalog name (tpu_v4, tpu_v3, a100, ipu_mk2).
class ChipCatalog {
 public:
  /// Reads a catalog document. Schema violations throw ValidationError naming
  /// every offending field.
  static ChipCatalog load(const std::string& path);
  static ChipCatalog parse(const std::string& json_text);

  const ChipSpec& at(const std::string& name) const;
  bool contains(const std::string& name) const { return chips_.count(name) != 0; }
  std::vector<std::string> names() const;
  int version() const { return version_; }

 private:
  int version_ = 0;
  std::map<std::string, ChipSpec> chips_;
};

}  // namespace torusforge

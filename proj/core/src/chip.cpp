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

#include "torusforge/chip.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "torusforge/error.hpp"

namespace torusforge {

using nlohmann::json;

namespace {

class FieldReader {
 public:
  FieldReader(const json& object, std::string prefix, std::vector<std::string>& problems)
      : object_(object), prefix_(std::move(prefix)), problems_(problems) {}

  double positive(const char* key) {
    auto v = optional_positive(key);
    if (!v) {
      if (!object_.contains(key)) problems_.push_back(prefix_ + key + ": missing");
      return 0.0;
    }
    return *v;
  }

  std::optional<double> optional_positive(const char* key) {
    if (!object_.contains(key) || object_.at(key).is_null()) return std::nullopt;
    const json& v = object_.at(key);
    if (!v.is_number() || !(v.get<double>() > 0.0)) {
      problems_.push_back(prefix_ + key + ": must be a positive number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  int count(const char* key, bool required) {
    if (!object_.contains(key)) {
      if (required) problems_.push_back(prefix_ + key + ": missing");
      return 0;
    }
    const json& v = object_.at(key);
    if (!v.is_number_integer() || v.get<int>() < 0) {
      problems_.push_back(prefix_ + key + ": must be a non-negative integer");
      return 0;
    }
    return v.get<int>();
  }

 private:
  const json& object_;
  std::string prefix_;
  std::vector<std::string>& problems_;
};

}  // namespace

ChipCatalog ChipCatalog::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("chip catalog is not valid JSON: ") + e.what());
  }
  std::vector<std::string> problems;
  ChipCatalog catalog;
  if (!doc.is_object()) throw ValidationError("chip catalog must be a JSON object");
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
    problems.push_back("version: missing or not an integer");
  } else {
    catalog.version_ = doc.at("version").get<int>();
  }
  if (!doc.contains("chips") || !doc.at("chips").is_object()) {
    problems.push_back("chips: missing or not an object");
  } else {
    for (const auto& [name, entry] : doc.at("chips").items()) {
      if (!entry.is_object()) {
        problems.push_back(name + ": must be an object");
        continue;
      }
      FieldReader r(entry, name + ".", problems);
      ChipSpec chip;
      chip.name = name;
      chip.peak_flops = r.positive("peak_flops");
      chip.peak_flops_int8 = r.optional_positive("peak_flops_int8");
      chip.hbm_bw = r.optional_positive("hbm_bw");
      chip.hbm_capacity = r.optional_positive("hbm_capacity");
      chip.ici_links = r.count("ici_links", true);
      chip.ici_bw = r.positive("ici_bw");
      chip.sparse_cores = r.count("sparse_cores", false);
      chip.chips_per_host = r.count("chips_per_host", true);
      if (entry.contains("power")) {
        FieldReader p(entry.at("power"), name + ".power.", problems);
        chip.power.idle = p.optional_positive("idle");
        chip.power.min = p.optional_positive("min");
        chip.power.mean = p.optional_positive("mean");
        chip.power.max = p.optional_positive("max");
        chip.power.tdp = p.optional_positive("tdp");
      }
      if (chip.hbm_bw.has_value() != chip.hbm_capacity.has_value()) {
        problems.push_back(name + ".hbm_bw/hbm_capacity: must be given together");
      }
      catalog.chips_.emplace(name, std::move(chip));
    }
  }
  if (!problems.empty()) {
    std::string message = "chip catalog schema violation:";
    for (const auto& p : problems) message += "\n  " + p;
    throw ValidationError(message);
  }
  return catalog;
}

ChipCatalog ChipCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open chip catalog '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const ChipSpec& ChipCatalog::at(const std::string& name) const {
  auto it = chips_.find(name);
  if (it == chips_.end()) throw ValidationError("unknown chip '" + name + "'");
  return it->second;
}

std::vector<std::string> ChipCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& [name, chip] : chips_) out.push_back(name);
  return out;
}

}  // namespace torusforge

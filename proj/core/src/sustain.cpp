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

#include "torusforge/sustain.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "torusforge/error.hpp"

namespace torusforge::sustain {

void FourMInputs::validate() const {
  std::vector<std::string> bad;
  if (!(model_factor > 0.0)) bad.push_back("model_factor");
  if (!(machine_ratio > 0.0)) bad.push_back("machine_ratio");
  if (!(pue_reference > 0.0)) bad.push_back("pue_reference");
  if (!(pue_subject > 0.0)) bad.push_back("pue_subject");
  if (!(ci_reference > 0.0)) bad.push_back("ci_reference");
  if (!(ci_subject > 0.0)) bad.push_back("ci_subject");
  if (bad.empty()) return;
  std::string message = "inputs must be positive:";
  for (const auto& b : bad) message += " " + b;
  throw ValidationError(message);
}

FourMInputs FourMInputs::parse(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sustainability defaults are not valid JSON: ") + e.what());
  }
  FourMInputs in;
  try {
    in.model_factor = doc.value("model_factor", in.model_factor);
    in.machine_ratio = doc.value("machine_ratio", in.machine_ratio);
    in.pue_reference = doc.value("pue_reference", in.pue_reference);
    in.pue_subject = doc.value("pue_subject", in.pue_subject);
    in.ci_reference = doc.value("ci_reference_kg_per_kwh", in.ci_reference);
    in.ci_subject = doc.value("ci_subject_kg_per_kwh", in.ci_subject);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sustainability defaults: ") + e.what());
  }
  in.validate();
  return in;
}

FourMInputs FourMInputs::load(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ValidationError("cannot open sustainability defaults '" + path + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse(buffer.str());
}

double energy_ratio(const FourMInputs& in) {
  in.validate();
  return in.model_factor * in.machine_ratio * in.pue_reference / in.pue_subject;
}

double co2e_ratio(double energy, const FourMInputs& in) {
  in.validate();
  if (!(energy > 0.0)) throw ValidationError("energy ratio must be positive");
  return energy * in.ci_reference / in.ci_subject;
}

}  // namespace torusforge::sustain

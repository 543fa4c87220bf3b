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

#include <string>

namespace torusforge::sustain {

/// Multiplicative factors comparing a reference deployment to a subject one.
/// Intensities are kgCO2e per kWh.
struct FourMInputs {
  double model_factor = 1.0;
  double machine_ratio = 2.0;  // perf/W of subject over reference
  double pue_reference = 1.57;
  double pue_subject = 1.10;
  double ci_reference = 0.475;
  double ci_subject = 0.074;

  void validate() const;
  static FourMInputs load(const std::string& path);
  static FourMInputs parse(const std::string& json_text);
};

/// model * machine * pue_reference / pue_subject
double energy_ratio(const FourMInputs& in);
/// energy * ci_reference / ci_subject
double co2e_ratio(double energy, const FourMInputs& in);

}  // namespace torusforge::sustain

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

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace torusforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

/// Where catalogs and default constants come from.
struct Context {
  std::string data_dir;      // holds model_constants.json, sustain_defaults.json
  std::string catalog_path;  // chips.json
  unsigned threads = 0;      // 0 = hardware concurrency; never part of a report

  /// TORUSFORGE_DATA, then the build and install data directories;
  /// TORUSFORGE_CATALOG overrides the catalog.
  static Context from_environment();
};

/// Runs one command from fully resolved inputs and returns its outputs. A
/// report's "inputs" fed back through this function reproduce its "outputs".
nlohmann::json execute(const std::string& command, const nlohmann::json& inputs,
                       const Context& context);

/// {command, inputs, outputs, seeds, tool_version}
nlohmann::json make_report(const std::string& command, const nlohmann::json& inputs,
                           const nlohmann::json& outputs);

/// Parses argv, dispatches, writes JSON (or CSV with --csv) to `out` or
/// --out, and returns 0, 1 (internal error) or 2 (validation or usage error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string tool_version();

}  // namespace torusforge::cli

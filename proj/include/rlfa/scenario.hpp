// Copyright 2026 The rlfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RLFA_SCENARIO_HPP_
#define RLFA_SCENARIO_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlfa/errors.hpp"

namespace rlfa {

// One finished experiment: resolved config and headline metric in the
// metadata, CSV bodies by file name, and a pass/fail verdict for scenarios
// that assert properties. CSV bodies are byte-stable across reruns of the
// same config; only the wall-time field of the metadata varies.
struct RunArtifact {
  nlohmann::json metadata;
  std::vector<std::pair<std::string, std::string>> tables;
  bool has_assertions = false;
  bool assertions_passed = true;
  std::string summary;
  double headline = 0.0;

  // Writes metadata.json, every CSV table, and summary.txt into dir,
  // creating it if needed.
  void Write(const std::filesystem::path& dir) const;
};

// Scenario names: exact-dp, softmax-gap, fqi, lsvi-ucb, policy-gradient,
// fitted-reward, spectrum, power-function, perturbation, curse-demo,
// closure-check. Unknown scenarios and unknown config keys are rejected
// with ValidationError.
RunArtifact RunScenario(const nlohmann::json& config);

struct SweepPoint {
  nlohmann::json axis_value;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunArtifact artifact;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  // Columns: axis,count,median,q25,q75,loglog_slope,status. One row per
  // axis value, aggregated over the config's seed list; the slope column
  // compares consecutive axis medians on log-log scale.
  std::string aggregate_csv;
};

// Runs the template once per (axis value, seed) with the axis key
// overridden. Seeds come from config key "seeds" (defaults to the single
// "seed"). Failed points are recorded, not fatal. Points run concurrently.
SweepResult Sweep(const nlohmann::json& base_config,
                  const std::string& axis_name,
                  const std::vector<nlohmann::json>& axis_values);

// Output root: the RLFA_OUTPUT_ROOT environment variable, else the current
// directory.
std::filesystem::path OutputRoot();

}  // namespace rlfa

#endif  // RLFA_SCENARIO_HPP_

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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "rlfa/errors.hpp"
#include "rlfa/scenario.hpp"

namespace {

// Exit codes: 0 success, 2 bad config or usage, 3 numerical failure,
// 4 scenario assertions failed.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kAssertionFailure = 4;

nlohmann::json LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw rlfa::ValidationError("cannot open config file: " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw rlfa::ValidationError(std::string("config is not valid JSON: ") +
                                e.what());
  }
}

std::filesystem::path RunOutputDir(const nlohmann::json& config,
                                   const rlfa::RunArtifact& art) {
  if (config.contains("out") && config.at("out").is_string() &&
      !config.at("out").get<std::string>().empty()) {
    return std::filesystem::path(config.at("out").get<std::string>());
  }
  const std::string scenario = art.metadata.at("scenario").get<std::string>();
  const auto seed = art.metadata.at("seed").get<std::uint64_t>();
  return rlfa::OutputRoot() /
         (scenario + "-seed" + std::to_string(seed));
}

// Axis values arrive as name=v1,v2,... where each v parses as a JSON
// scalar when possible and falls back to a plain string.
std::pair<std::string, std::vector<nlohmann::json>> ParseAxis(
    const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw rlfa::ValidationError("axis must look like name=v1,v2,...");
  }
  const std::string name = spec.substr(0, eq);
  std::vector<nlohmann::json> values;
  std::string rest = spec.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string token = rest.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (token.empty()) {
      throw rlfa::ValidationError("axis has an empty value");
    }
    try {
      values.push_back(nlohmann::json::parse(token));
    } catch (const nlohmann::json::parse_error&) {
      values.push_back(token);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (values.empty()) {
    throw rlfa::ValidationError("axis has no values");
  }
  return {name, values};
}

std::string SafePathToken(const nlohmann::json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ' ' || c == '"') c = '_';
  }
  return s;
}

int DoRun(const std::string& config_path) {
  const nlohmann::json config = LoadConfig(config_path);
  const rlfa::RunArtifact art = rlfa::RunScenario(config);
  const std::filesystem::path out = RunOutputDir(config, art);
  art.Write(out);
  std::cout << "scenario: "
            << art.metadata.at("scenario").get<std::string>() << "\n"
            << "headline: " << art.headline << "\n"
            << "summary: " << art.summary << "\n";
  if (art.has_assertions) {
    std::cout << "assertions: " << (art.assertions_passed ? "PASS" : "FAIL")
              << "\n";
  }
  std::cout << "wrote: " << out.string() << std::endl;
  if (art.has_assertions && !art.assertions_passed) {
    return kAssertionFailure;
  }
  return kOk;
}

int DoSweep(const std::string& config_path, const std::string& axis_spec) {
  const nlohmann::json config = LoadConfig(config_path);
  const auto [axis_name, axis_values] = ParseAxis(axis_spec);
  const rlfa::SweepResult result =
      rlfa::Sweep(config, axis_name, axis_values);

  std::filesystem::path out;
  if (config.contains("out") && config.at("out").is_string() &&
      !config.at("out").get<std::string>().empty()) {
    out = std::filesystem::path(config.at("out").get<std::string>());
  } else {
    const std::string scenario =
        config.value("scenario", std::string("sweep"));
    out = rlfa::OutputRoot() / (scenario + "-sweep-" + axis_name);
  }
  std::filesystem::create_directories(out);

  bool any_ok = false;
  bool any_assert_failed = false;
  for (const rlfa::SweepPoint& pt : result.points) {
    const std::filesystem::path dir =
        out / (axis_name + "=" + SafePathToken(pt.axis_value)) /
        ("seed=" + std::to_string(pt.seed));
    if (pt.ok) {
      any_ok = true;
      pt.artifact.Write(dir);
      if (pt.artifact.has_assertions && !pt.artifact.assertions_passed) {
        any_assert_failed = true;
      }
    } else {
      std::filesystem::create_directories(dir);
      std::ofstream err(dir / "error.txt");
      err << pt.error << "\n";
    }
  }
  {
    std::ofstream agg(out / "aggregate.csv");
    agg << result.aggregate_csv;
  }
  std::cout << result.aggregate_csv;
  std::cout << "wrote: " << out.string() << std::endl;
  if (!any_ok) return kNumericalError;
  if (any_assert_failed) return kAssertionFailure;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-MDP laboratory for value fitting, optimistic "
               "exploration, and kernel error analysis"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run one scenario from a config");
  run->add_option("--config", run_config, "Path to a JSON config")
      ->required();

  std::string sweep_config;
  std::string sweep_axis;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Run a scenario across an axis of values");
  sweep->add_option("--config", sweep_config, "Path to a JSON config")
      ->required();
  sweep->add_option("--axis", sweep_axis, "Axis spec name=v1,v2,...")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) {
      return DoRun(run_config);
    }
    return DoSweep(sweep_config, sweep_axis);
  } catch (const rlfa::ValidationError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kConfigError;
  } catch (const rlfa::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kNumericalError;
  }
}

// Copyright 2026 The acqpt authors
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

#ifndef ACQPT_SCENARIO_HPP
#define ACQPT_SCENARIO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acqpt/engine.hpp"

namespace acqpt {

// One sweep arm: a run configuration plus the recipe drawing a fresh truth
// channel for every trial. Truth and seed inside config are placeholders;
// run_scenario fills them per trial from the master seed.
struct RunTemplate {
  std::string name;
  std::string channel = "haar";  // haar | kraus | identity | ixh | cnot |
                                 // imperfect_cnot
  Index rank = 1;                // Kraus rank of the "kraus" recipe
  double eta = 0.05;             // admixture weight of imperfect channels
  int trials = 1;
  RunConfig config;
};

struct Scenario {
  std::string name;
  std::string out_dir;
  std::optional<std::uint64_t> master_seed;
  std::vector<RunTemplate> templates;
};

// Parses either format; JSON when the first non-space byte is '{', the
// sectioned key = value format otherwise. Throws std::invalid_argument on
// malformed input or unknown keys.
Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_ini(std::istream& in);
Scenario parse_scenario_json(std::istream& in);

// Structural validation shared by the parsers and run_scenario: unique
// filename-safe template names, trials in [1, 999], recipe and dimension
// compatible. Throws std::invalid_argument.
void validate_scenario(const Scenario& scenario);

std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

// Mean and unbiased standard deviation at one step index, over the
// converged traces that reached it.
struct CurvePoint {
  int k = 0;
  int n = 0;
  double s_cvx_mean = 0.0;
  double s_cvx_std = 0.0;
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
};

// Statistics for one template. Moments cover converged traces only;
// unconverged and failed trials are counted separately.
struct TemplateSummary {
  std::string name;
  int trials = 0;
  int converged = 0;
  int unconverged = 0;
  int failed = 0;
  double convergence_rate = 0.0;  // converged over completed
  double k_ic_mean = 0.0;
  double k_ic_std = 0.0;  // unbiased; zero with single_sample when n = 1
  bool single_sample = false;
  double fidelity_mean = 0.0;
  double wall_ms_mean = 0.0;  // never serialized into summary files
  std::vector<CurvePoint> curve;
};

struct Summary {
  std::string scenario;
  std::optional<std::uint64_t> master_seed;
  std::vector<TemplateSummary> templates;
};

// Aggregates the completed traces of one template; the caller names the
// result. Throws std::invalid_argument on an empty list.
TemplateSummary summarize(const std::vector<RunTrace>& traces);

struct ScenarioResult {
  Summary summary;
  int failed = 0;  // trials that threw; their errors are in the manifest
};

// Executes every trial on a bounded worker pool (ACQPT_WORKERS, default
// one) and writes per-trial trace JSON, curves.csv, summary.json,
// manifest.json, and metadata.json under scenario.out_dir. All outputs
// except metadata.json are byte-reproducible for a fixed master seed.
// Throws std::invalid_argument without a master seed.
ScenarioResult run_scenario(const Scenario& scenario);

void write_summary_json(const Summary& summary, std::ostream& out);

// Rebuilds a summary from the trace-<template>-<trial>.json files under
// dir, grouping by template name.
Summary summarize_directory(const std::string& dir);

}  // namespace acqpt

#endif  // ACQPT_SCENARIO_HPP

// Copyright 2026 The ihom Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ihom/estimate.hpp"
#include "ihom/stencil.hpp"

namespace ihom {

enum class Stage { kCell, kStrip, kParams, kSimulate, kVerify, kCompare };

inline constexpr int kStageCount = 6;

std::string_view to_string(Stage stage);
/// Throws kValidation for unknown names.
Stage stage_from_string(std::string_view name);
/// Stages from the first one up to and including `last`.
std::vector<Stage> stages_through(Stage last);

/// Settings of one pipeline run. Text form is `key = value` per line with
/// `#` comments; see README for the key list.
struct RunConfig {
  std::string field;
  /// Contents of the field file, loaded by parse_config.
  std::string field_text;
  double eta = 0.5;

  int n = 64;
  int k_trunc = 8;
  StencilKind stencil = StencilKind::kCentral4;
  bool strict = false;

  std::vector<Stage> stages = stages_through(Stage::kCompare);
  std::uint64_t seed = 1;
  std::string out = "out";

  double epsilon = 0.1;
  double a = 0.75;
  /// Zero selects the largest admissible hitting-time step.
  double dt = 0.0;
  long long paths = 2000;
  bool bridge = true;
  double horizon_factor = 50.0;

  double longrun_k = 8.0;
  long long longrun_paths = 400;
  double longrun_dt = 1e-3;

  long long occupation_paths = 0;
  double occupation_dt = 1e-3;

  double limit_h = 0.01;
  long long limit_paths = 2000;
  double limit_t = 1.0;

  double compare_t = 1.0;
  long long compare_paths = 2000;
  double compare_dt = 5e-3;

  long long export_paths = 0;
  long long export_stride = 1;

  /// Raw config text, part of the provenance hash.
  std::string text;

  bool has_stage(Stage s) const;
  /// FNV-1a of the config text and the field file.
  std::string hash() const;
};

/// Parses and validates. Relative field paths resolve against `base_dir`;
/// the field file must exist and is read into `field_text`.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct PipelineResult {
  /// Machine-readable report (JSON).
  std::string report;
  /// Human-readable rendering of the same numbers.
  std::string summary;
  std::vector<PathEstimate> estimates;
  std::vector<Check> checks;
  bool pass = true;
};

/// Runs the configured stages. Failures inside a stage are rethrown as kStage
/// errors naming the stage.
PipelineResult run_pipeline(const RunConfig& config);

/// Writes report.json, summary.txt and estimates.tsv under config.out.
void write_outputs(const RunConfig& config, const PipelineResult& result);

/// Writes micro_<i>.tsv (t, x), rescaled_<i>.tsv (t, eps X(t / eps^2)) and
/// limit_<i>.tsv (t, x, L) under config.out/paths. Needs the simulate stage
/// and export_paths > 0.
std::vector<std::filesystem::path> export_paths(const RunConfig& config);

}  // namespace ihom

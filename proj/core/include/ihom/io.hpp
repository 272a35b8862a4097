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

#include "ihom/cell_solver.hpp"
#include "ihom/drift_field.hpp"
#include "ihom/estimate.hpp"
#include "ihom/strip_solver.hpp"

namespace ihom {

/// Field definition (JSON):
///   { "dim": 2, "eta": 0.5,
///     "plus":  { "potential": [ {"k": [1, 0], "cos": 0.0, "sin": 0.4} ] },
///     "minus": { "components": [ [terms of b_1], [terms of b_2] ] },
///     "perturbation": { "constant": [0.0, 0.8] } }
/// A side is one of "zero", "constant", "potential" (b = -grad V),
/// "stream" (d = 2, b = (d2 H, -d1 H)) or "components".
/// `eta` falls back to `default_eta` when absent.
InterfaceDriftField parse_field(std::string_view json_text, double default_eta = kDefaultEta);
std::string field_to_json(const InterfaceDriftField& field);

std::string cell_to_json(const CellSolution& cell);
CellSolution parse_cell(std::string_view json_text);

std::string params_to_json(const InterfaceParams& params);
InterfaceParams parse_params(std::string_view json_text);

/// Tab-separated rows: estimator, value, stderr, n, seed, censored, config_hash.
std::string estimates_tsv(const std::vector<PathEstimate>& rows, std::string_view config_hash);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ihom

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

// Command-line driver for the homogenization pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ihom/error.hpp"
#include "ihom/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> stage;
  bool strict = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run configuration (key = value)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Global seed (overrides config)");
  cmd->add_option("--out", f.out, "Output directory (overrides config)");
  cmd->add_option("--stage", f.stage, "Last stage to run (overrides the verb)");
  cmd->add_flag("--strict", f.strict, "Fail on clipped densities and asymmetric tensors");
}

int run(const std::string& verb, const Flags& f) {
  ihom::RunConfig config = ihom::load_config(f.config);
  if (verb != "all") config.stages = ihom::stages_through(ihom::stage_from_string(verb));
  if (f.stage) config.stages = ihom::stages_through(ihom::stage_from_string(*f.stage));
  if (f.seed) config.seed = *f.seed;
  if (f.out) config.out = *f.out;
  if (f.strict) config.strict = true;

  const ihom::PipelineResult result = ihom::run_pipeline(config);
  ihom::write_outputs(config, result);
  std::size_t exported = 0;
  if (config.export_paths > 0 && config.has_stage(ihom::Stage::kSimulate)) {
    exported = ihom::export_paths(config).size();
  }
  std::cout << result.summary;
  std::cout << "wrote " << config.out << "/report.json, summary.txt, estimates.tsv";
  if (exported > 0) std::cout << " and " << exported << " path files";
  std::cout << "\n";
  for (const auto& c : result.checks) {
    if (!c.pass) std::cerr << "check failed: " << c.name << ": " << c.detail << "\n";
  }
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interface homogenization pipeline"};
  app.require_subcommand(1);
  Flags flags;
  const char* verbs[][2] = {
      {"cell", "Solve the periodic cell problems"},
      {"strip", "Solve the strip invariant measure"},
      {"params", "Assemble the limiting interface parameters"},
      {"simulate", "Monte Carlo checks of the microscopic process"},
      {"verify", "Martingale-problem checks of the limit process"},
      {"compare", "Compare rescaled and limit laws"},
      {"all", "Run every stage listed in the config"},
  };
  for (const auto& v : verbs) add_flags(app.add_subcommand(v[0], v[1]), flags);
  CLI11_PARSE(app, argc, argv);

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return run(verb, flags);
  } catch (const ihom::Error& e) {
    std::cerr << "error [" << ihom::to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

// Copyright 2026-present the nigmrf authors
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

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nigmrf/cli.hpp"
#include "nigmrf/error.hpp"
#include "nigmrf/parallel.hpp"

using namespace nigmrf;

int main(int argc, char** argv) {
  CLI::App app{"Spatial NIG mixture models for substitute-channel prediction"};
  app.require_subcommand(1);
  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  for (const char* name : {"simulate", "fit", "predict", "evaluate", "crossval"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (default: NIGMRF_THREADS, then all cores)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }

  try {
    const cli::Command command = cli::parse_command(app.get_subcommands().front()->get_name());
    cli::Config cfg = cli::load_config(config_path, command);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (threads) {
      cfg.threads = *threads;
    } else if (const char* env = std::getenv("NIGMRF_THREADS"); env && cfg.threads == 0) {
      try {
        cfg.threads = std::stoi(env);
      } catch (const std::exception&) {
        throw UsageError(std::string("NIGMRF_THREADS is not a number: '") + env + "'");
      }
      if (cfg.threads < 1) throw UsageError("NIGMRF_THREADS must be positive");
    }
    return cli::run_command(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "nigmrf: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}

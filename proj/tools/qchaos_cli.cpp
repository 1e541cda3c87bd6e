// Copyright 2026 The qchaos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qchaos/errors.hpp"
#include "qchaos/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

void log_error(std::string_view kind, const std::exception& e) {
  std::cerr << "event=error kind=" << kind << " message=\"" << e.what() << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qchaos: propagation of chaos in mean-field quantum dynamics and measurement chains"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the JSON config")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "PRNG seed (overrides seed)");
  run->add_flag("--quiet", quiet, "Suppress progress logs");

  auto* list = app.add_subcommand("list-scenarios", "List scenario ids");

  std::string scenario_id;
  auto* desc = app.add_subcommand("describe", "Describe a scenario");
  desc->add_option("scenario", scenario_id, "Scenario id")->required();

  std::string validate_path;
  auto* check = app.add_subcommand("validate", "Validate a JSON config without running it");
  check->add_option("config", validate_path, "Path to the JSON config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (auto s : qchaos::all_scenarios()) std::cout << qchaos::to_string(s) << '\n';
      return 0;
    }
    if (desc->parsed()) {
      const auto s = qchaos::scenario_from_string(scenario_id);
      std::cout << qchaos::to_string(s) << "\n\n" << qchaos::describe(s) << '\n';
      return 0;
    }
    if (check->parsed()) {
      const auto cfg = qchaos::load_config(validate_path);
      qchaos::validate(cfg);
      std::cout << "ok scenario=" << qchaos::to_string(cfg.scenario) << " config_hash=" << cfg.hash() << '\n';
      return 0;
    }
    auto cfg = qchaos::load_config(config_path);
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    qchaos::validate(cfg);
    qchaos::RunOptions options;
    options.quiet = quiet;
    qchaos::run_experiment(cfg, options);
    return 0;
  } catch (const qchaos::ConfigError& e) {
    log_error("config", e);
    return kExitConfig;
  } catch (const qchaos::InvariantError& e) {
    log_error("invariant", e);
    return kExitInvariant;
  } catch (const std::exception& e) {
    log_error("runtime", e);
    return 1;
  }
}

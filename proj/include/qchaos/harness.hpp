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

#pragma once

// Configuration-driven experiments: each scenario computes chaos profiles in
// memory, and run_experiment writes them (plus metadata) to an output
// directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchaos/chaos_metrics.hpp"
#include "qchaos/dynamics.hpp"
#include "qchaos/hartree.hpp"
#include "qchaos/measurement.hpp"

namespace qchaos {

enum class Scenario { spohn_convergence, measurement_chain, kernel_composition, encode_read_roundtrip };

std::string_view to_string(Scenario s);
Scenario scenario_from_string(std::string_view id);
std::vector<Scenario> all_scenarios();
std::string_view describe(Scenario s);

// One step of n-site dynamics at a fixed time.
struct DynamicsSpec {
  enum class Kind { identity, mean_field, dephase };
  Kind kind = Kind::mean_field;
  nlohmann::json potential = "xx+zz";  // mean_field only
  double period = 1.0;                 // mean_field only
  double dephase_p = 0.0;              // dephase only

  std::string label() const;
  nlohmann::json to_json() const;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::spohn_convergence;
  int d = 2;
  std::vector<int> n_values{2, 4, 6, 8, 10};
  std::vector<int> k_values{1, 2};
  nlohmann::json potential = "xx+zz";
  nlohmann::json initial_state = "e0";
  std::string basis = "computational";
  double t = 1.0;        // spohn-convergence evolution time
  double period = 1.0;   // measurement period T
  double dt = 1e-3;
  double hbar = 1.0;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<double> p{0.7, 0.3};
  std::size_t chain_steps = 100;
  std::vector<DynamicsSpec> kernels;  // kernel-composition, chain order
  DynamicsSpec dynamics;              // encode-read-roundtrip
  double preparation_noise = 0.0;     // encode-read-roundtrip
  std::size_t memory_guard = kDefaultMaxDim;
  std::size_t write_kernels_max_states = 64;

  // Missing keys take the defaults above; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON, output_dir excluded.
  std::string hash() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
// Throws ConfigError describing the first problem found.
void validate(const ExperimentConfig& cfg);

TwoBodyPotential resolve_potential(const nlohmann::json& spec, std::size_t max_dim = kDefaultMaxDim);
DensityOperator resolve_single_site_state(const nlohmann::json& spec, int d);
MeasurementBasis resolve_basis(std::string_view id, int d);
DynamicsSpec parse_dynamics(const nlohmann::json& j, const ExperimentConfig& defaults);

struct ReportRow {
  std::string scenario;
  std::string profile;
  int n = 0;
  int k = 0;
  double distance = 0.0;
  NormTag norm = NormTag::trace;
  double runtime_ms = 0.0;
  std::string config_hash;
};

struct LabeledProfile {
  std::string label;
  ChaosProfile profile;
  std::optional<double> exponent;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

struct ScenarioResult {
  std::vector<LabeledProfile> profiles;
  std::vector<ReportRow> rows;
  std::vector<OutputFile> files;  // deterministic given config
  nlohmann::json extra = nlohmann::json::object();
};

ScenarioResult run_spohn_convergence(const ExperimentConfig& cfg);
ScenarioResult run_measurement_chain(const ExperimentConfig& cfg);
ScenarioResult run_kernel_composition(const ExperimentConfig& cfg);
ScenarioResult run_encode_read_roundtrip(const ExperimentConfig& cfg);
ScenarioResult run_scenario(const ExperimentConfig& cfg);

// Single-site law that the n-site kernel of `spec` approaches, starting from
// the law p: prepare Σ p(j)|e_j><e_j|, apply the one-particle limit dynamics,
// read in `basis`.
DiscreteMeasure limit_law(const DynamicsSpec& spec, const DiscreteMeasure& p, const MeasurementBasis& basis,
                          const ExperimentConfig& cfg);
TransitionKernel scenario_kernel(const DynamicsSpec& spec, int n, const MeasurementBasis& basis,
                                 const ExperimentConfig& cfg);

struct RunOptions {
  bool quiet = false;
  std::ostream* log = nullptr;  // key=value lines; nullptr means std::cerr
};

// Runs the scenario, writes every output file plus report.csv and
// metadata.json under cfg.output_dir (write-temp-then-rename).
ScenarioResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace qchaos

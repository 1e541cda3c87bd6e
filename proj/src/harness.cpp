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

#include "qchaos/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "qchaos/errors.hpp"
#include "qchaos/format.hpp"
#include "qchaos/operator_json.hpp"

namespace qchaos {

using nlohmann::json;

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::spohn_convergence: return "spohn-convergence";
    case Scenario::measurement_chain: return "measurement-chain";
    case Scenario::kernel_composition: return "kernel-composition";
    case Scenario::encode_read_roundtrip: return "encode-read-roundtrip";
  }
  return "spohn-convergence";
}

Scenario scenario_from_string(std::string_view id) {
  for (Scenario s : all_scenarios()) {
    if (to_string(s) == id) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(id) + "'");
}

std::vector<Scenario> all_scenarios() {
  return {Scenario::spohn_convergence, Scenario::measurement_chain, Scenario::kernel_composition,
          Scenario::encode_read_roundtrip};
}

std::string_view describe(Scenario s) {
  switch (s) {
    case Scenario::spohn_convergence:
      return "Evolve D^{(x)n} under the mean-field Hamiltonian H_n = (1/n) sum_{i<j} V_ij for time t and\n"
             "report the trace-norm distance between its k-marginal and the k-fold power of the\n"
             "one-particle Hartree solution D(t). Keys: d, n, k, potential, initial_state, t, dt, hbar.";
    case Scenario::measurement_chain:
      return "Build the Markov kernel of periodic basis measurement (period T) of the n-site dynamics,\n"
             "push the product law p^{(x)n} through it once, and report the total-variation distance of\n"
             "the k-marginals to q^{(x)k}, q being the read-out of the Hartree-evolved single-site\n"
             "state. Also samples chain paths. Keys: p, basis, dynamics (or potential, T), chain_steps, seed.";
    case Scenario::kernel_composition:
      return "Build one measurement kernel per entry of 'kernels', compose them in list order and report\n"
             "the total-variation profiles of every individual kernel and of the composition.";
    case Scenario::encode_read_roundtrip:
      return "Encode p^{(x)n} as a density through prepared states D(j), evolve with 'dynamics', read with\n"
             "the projective POVM of 'basis' and report the total-variation profile against the limit\n"
             "law. Keys: p, preparation_noise, dynamics, basis.";
  }
  return "";
}

std::string DynamicsSpec::label() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::dephase: return "dephase(" + format_double(dephase_p) + ")";
    case Kind::mean_field: {
      const std::string v = potential.is_string() ? potential.get<std::string>() : "custom";
      return "mean-field(" + v + ",T=" + format_double(period) + ")";
    }
  }
  return "identity";
}

json DynamicsSpec::to_json() const {
  switch (kind) {
    case Kind::identity: return {{"kind", "identity"}};
    case Kind::dephase: return {{"kind", "dephase"}, {"p", dephase_p}};
    case Kind::mean_field: return {{"kind", "mean-field"}, {"potential", potential}, {"T", period}};
  }
  return {{"kind", "identity"}};
}

DynamicsSpec parse_dynamics(const json& j, const ExperimentConfig& defaults) {
  DynamicsSpec spec;
  spec.potential = defaults.potential;
  spec.period = defaults.period;
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
    if (kind.rfind("dephase(", 0) == 0 && kind.back() == ')') {
      spec.kind = DynamicsSpec::Kind::dephase;
      try {
        spec.dephase_p = std::stod(kind.substr(8, kind.size() - 9));
      } catch (const std::exception&) {
        throw ConfigError("cannot parse dephasing probability in '" + kind + "'");
      }
      return spec;
    }
  } else if (j.is_object()) {
    for (const auto& [key, _] : j.items()) {
      if (key != "kind" && key != "potential" && key != "T" && key != "p") {
        throw ConfigError("unknown dynamics key '" + key + "'");
      }
    }
    if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("dynamics spec needs a string 'kind'");
    kind = j.at("kind").get<std::string>();
    if (j.contains("potential")) spec.potential = j.at("potential");
    if (j.contains("T")) spec.period = j.at("T").get<double>();
    if (j.contains("p")) spec.dephase_p = j.at("p").get<double>();
  } else {
    throw ConfigError("dynamics spec must be a string or an object");
  }
  if (kind == "identity") {
    spec.kind = DynamicsSpec::Kind::identity;
  } else if (kind == "mean-field") {
    spec.kind = DynamicsSpec::Kind::mean_field;
  } else if (kind == "dephase") {
    spec.kind = DynamicsSpec::Kind::dephase;
  } else {
    throw ConfigError("unknown dynamics kind '" + kind + "'");
  }
  return spec;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const std::set<std::string> kKeys{
      "scenario", "d",      "n",           "k",        "potential", "initial_state",     "basis",
      "t",        "T",      "dt",          "hbar",     "seed",      "output_dir",        "p",
      "chain_steps", "kernels", "dynamics", "preparation_noise", "memory_guard", "write_kernels_max_states"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  try {
    if (!j.contains("scenario")) throw ConfigError("config needs a 'scenario'");
    cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("d")) cfg.d = j.at("d").get<int>();
    if (j.contains("n")) cfg.n_values = j.at("n").get<std::vector<int>>();
    if (j.contains("k")) cfg.k_values = j.at("k").get<std::vector<int>>();
    if (j.contains("potential")) cfg.potential = j.at("potential");
    if (j.contains("initial_state")) cfg.initial_state = j.at("initial_state");
    if (j.contains("basis")) cfg.basis = j.at("basis").get<std::string>();
    if (j.contains("t")) cfg.t = j.at("t").get<double>();
    if (j.contains("T")) cfg.period = j.at("T").get<double>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("hbar")) cfg.hbar = j.at("hbar").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("p")) cfg.p = j.at("p").get<std::vector<double>>();
    if (j.contains("chain_steps")) cfg.chain_steps = j.at("chain_steps").get<std::size_t>();
    if (j.contains("preparation_noise")) cfg.preparation_noise = j.at("preparation_noise").get<double>();
    if (j.contains("memory_guard")) cfg.memory_guard = j.at("memory_guard").get<std::size_t>();
    if (j.contains("write_kernels_max_states")) {
      cfg.write_kernels_max_states = j.at("write_kernels_max_states").get<std::size_t>();
    }
    cfg.dynamics = parse_dynamics(j.contains("dynamics") ? j.at("dynamics") : json("mean-field"), cfg);
    if (j.contains("kernels")) {
      if (!j.at("kernels").is_array()) throw ConfigError("'kernels' must be an array");
      for (const auto& k : j.at("kernels")) cfg.kernels.push_back(parse_dynamics(k, cfg));
    } else {
      cfg.kernels = {cfg.dynamics, cfg.dynamics};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
  }
  return cfg;
}

json ExperimentConfig::to_json() const {
  json kernel_specs = json::array();
  for (const auto& k : kernels) kernel_specs.push_back(k.to_json());
  return {{"scenario", std::string(qchaos::to_string(scenario))},
          {"d", d},
          {"n", n_values},
          {"k", k_values},
          {"potential", potential},
          {"initial_state", initial_state},
          {"basis", basis},
          {"t", t},
          {"T", period},
          {"dt", dt},
          {"hbar", hbar},
          {"seed", seed},
          {"output_dir", output_dir},
          {"p", p},
          {"chain_steps", chain_steps},
          {"kernels", std::move(kernel_specs)},
          {"dynamics", dynamics.to_json()},
          {"preparation_noise", preparation_noise},
          {"memory_guard", memory_guard},
          {"write_kernels_max_states", write_kernels_max_states}};
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  return hex64(fnv1a64(j.dump()));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

TwoBodyPotential resolve_potential(const json& spec, std::size_t max_dim) {
  if (spec.is_string()) return builtin_potential(spec.get<std::string>());
  return TwoBodyPotential(operator_from_json(spec, max_dim));
}

DensityOperator resolve_single_site_state(const json& spec, int d) {
  if (spec.is_string()) {
    const auto id = spec.get<std::string>();
    if (id.size() >= 2 && id[0] == 'e') {
      int j = -1;
      try {
        j = std::stoi(id.substr(1));
      } catch (const std::exception&) {
      }
      if (j < 0 || j >= d) throw ConfigError("basis state '" + id + "' outside C^" + std::to_string(d));
      return pure_state_projector(Vector::Unit(d, j));
    }
    if (id == "plus" || id == "minus") {
      if (d < 2) throw ConfigError("'" + id + "' needs d >= 2");
      Vector v = Vector::Zero(d);
      v(0) = 1.0;
      v(1) = id == "plus" ? 1.0 : -1.0;
      return pure_state_projector(v);
    }
    if (id == "maximally-mixed") return DensityOperator(Operator::single_site(Matrix::Identity(d, d) / d));
    throw ConfigError("unknown state id '" + id + "'");
  }
  if (spec.is_object() && spec.contains("bloch")) {
    if (d != 2) throw ConfigError("Bloch vectors need d = 2");
    const auto r = spec.at("bloch").get<std::vector<double>>();
    if (r.size() != 3) throw ConfigError("Bloch vector needs three components");
    Matrix m = 0.5 * (Matrix::Identity(2, 2) + r[0] * pauli::x() + r[1] * pauli::y() + r[2] * pauli::z());
    return DensityOperator(Operator::single_site(std::move(m)));
  }
  if (spec.is_object() && spec.contains("diagonal")) {
    const auto w = spec.at("diagonal").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != d) throw ConfigError("diagonal state needs d entries");
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = w[static_cast<std::size_t>(i)];
    return DensityOperator(Operator::single_site(std::move(m)));
  }
  const Operator op = operator_from_json(spec);
  if (op.space().n() != 1 || op.space().d() != d) throw ConfigError("initial state must be a single-site operator");
  return DensityOperator(op);
}

MeasurementBasis resolve_basis(std::string_view id, int d) {
  if (id == "computational") return MeasurementBasis::computational(d);
  if (id == "hadamard") {
    if (d != 2) throw ConfigError("the hadamard basis needs d = 2");
    return MeasurementBasis::hadamard();
  }
  throw ConfigError("unknown basis '" + std::string(id) + "'");
}

namespace {

bool uses_measurement(Scenario s) { return s != Scenario::spohn_convergence; }

void check_dynamics(const DynamicsSpec& spec, const ExperimentConfig& cfg, bool needs_map) {
  switch (spec.kind) {
    case DynamicsSpec::Kind::identity: break;
    case DynamicsSpec::Kind::dephase:
      if (cfg.d != 2) throw ConfigError("dephasing dynamics needs d = 2");
      if (!(spec.dephase_p >= 0.0 && spec.dephase_p <= 1.0)) throw ConfigError("dephasing p must lie in [0, 1]");
      if (needs_map) {
        // the roundtrip applies φ^{⊗n} through explicit Kraus products
        try {
          for (int n : cfg.n_values) guarded_power(2, n, std::size_t{1} << 8);
        } catch (const MemoryGuardError&) {
          throw ConfigError("dephasing dynamics in encode-read-roundtrip is limited to n <= 8");
        }
      }
      break;
    case DynamicsSpec::Kind::mean_field: {
      const auto v = resolve_potential(spec.potential, cfg.memory_guard);
      if (v.d() != cfg.d) throw ConfigError("potential acts on C^" + std::to_string(v.d()) + ", config has d=" + std::to_string(cfg.d));
      if (!(spec.period >= 0.0)) throw ConfigError("measurement period T must be >= 0");
      const double steps = spec.period / cfg.dt;
      if (std::abs(std::round(steps) * cfg.dt - spec.period) > 1e-9 * std::max(1.0, spec.period)) {
        throw ConfigError("dt does not divide T=" + format_double(spec.period));
      }
      for (int n : cfg.n_values) {
        if (n < 2) throw ConfigError("mean-field dynamics needs n >= 2");
      }
      break;
    }
  }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  try {
    if (cfg.d < 1) throw ConfigError("d must be >= 1");
    if (cfg.n_values.empty()) throw ConfigError("'n' must list at least one site count");
    int previous = 0;
    for (int n : cfg.n_values) {
      if (n <= previous) throw ConfigError("'n' must be strictly increasing positive integers");
      previous = n;
      try {
        guarded_power(static_cast<std::size_t>(cfg.d), n, cfg.memory_guard);
      } catch (const MemoryGuardError& e) {
        throw ConfigError(std::string("n=") + std::to_string(n) + ": " + e.what());
      }
    }
    if (cfg.k_values.empty()) throw ConfigError("'k' must list at least one marginal order");
    for (int k : cfg.k_values) {
      if (k < 1 || k > cfg.n_values.front()) {
        throw ConfigError("every k must satisfy 1 <= k <= min(n) = " + std::to_string(cfg.n_values.front()));
      }
    }
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(cfg.hbar > 0.0)) throw ConfigError("hbar must be positive");
    if (cfg.memory_guard < 1) throw ConfigError("memory_guard must be positive");

    if (cfg.scenario == Scenario::spohn_convergence) {
      if (!(cfg.t >= 0.0)) throw ConfigError("t must be >= 0");
      const double steps = cfg.t / cfg.dt;
      if (std::abs(std::round(steps) * cfg.dt - cfg.t) > 1e-9 * std::max(1.0, cfg.t)) {
        throw ConfigError("dt does not divide t=" + format_double(cfg.t));
      }
      const auto v = resolve_potential(cfg.potential, cfg.memory_guard);
      if (v.d() != cfg.d) throw ConfigError("potential dimension does not match d");
      for (int n : cfg.n_values) {
        if (n < 2) throw ConfigError("spohn-convergence needs n >= 2");
      }
      resolve_single_site_state(cfg.initial_state, cfg.d);
    }

    if (uses_measurement(cfg.scenario)) {
      resolve_basis(cfg.basis, cfg.d);
      if (static_cast<int>(cfg.p.size()) != cfg.d) throw ConfigError("'p' needs one weight per basis state");
      DiscreteMeasure(cfg.d, 1, cfg.p);
      if (!(cfg.preparation_noise >= 0.0 && cfg.preparation_noise <= 1.0)) {
        throw ConfigError("preparation_noise must lie in [0, 1]");
      }
      if (cfg.scenario == Scenario::kernel_composition) {
        if (cfg.kernels.size() < 2) throw ConfigError("kernel-composition needs at least two kernel specs");
        for (const auto& k : cfg.kernels) check_dynamics(k, cfg, false);
      } else {
        check_dynamics(cfg.dynamics, cfg, cfg.scenario == Scenario::encode_read_roundtrip);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// `# key=value` lines shared by every CSV of a run.
std::string csv_header(const ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  std::ostringstream os;
  os << "# scenario=" << to_string(cfg.scenario) << '\n';
  os << "# config_hash=" << cfg.hash() << '\n';
  os << "# rng=" << kRngName << '\n';
  os << "# seed=" << cfg.seed << '\n';
  for (const auto& [key, value] : extra) os << "# " << key << '=' << value << '\n';
  return os.str();
}

std::vector<std::pair<std::string, std::string>> profile_meta(const ExperimentConfig& cfg) {
  return {{"config_hash", cfg.hash()}, {"rng", kRngName}, {"seed", std::to_string(cfg.seed)}};
}

void add_profile(ScenarioResult& result, const ExperimentConfig& cfg, std::string label, ChaosProfile profile,
                 const std::map<int, double>& runtime_by_n) {
  std::optional<double> exponent;
  if (profile.points.size() >= 3) exponent = scaling_exponent(profile);
  for (const auto& pt : profile.points) {
    const auto it = runtime_by_n.find(pt.n);
    result.rows.push_back(ReportRow{std::string(to_string(cfg.scenario)), label, pt.n, profile.k, pt.distance,
                                    profile.norm, it == runtime_by_n.end() ? 0.0 : it->second, cfg.hash()});
  }
  std::ostringstream os;
  auto meta = profile_meta(cfg);
  meta.emplace_back("profile", label);
  meta.emplace_back("scaling_exponent", exponent ? format_double(*exponent) : "nan");
  write_profile_csv(os, profile, to_string(cfg.scenario), meta);
  result.files.push_back({"profile_" + label + ".csv", os.str()});
  result.profiles.push_back({std::move(label), std::move(profile), exponent});
}

DiscreteMeasure single_site_law(const ExperimentConfig& cfg) { return DiscreteMeasure(cfg.d, 1, cfg.p); }

DensityOperator limit_density(const DynamicsSpec& spec, const DensityOperator& d, const ExperimentConfig& cfg) {
  switch (spec.kind) {
    case DynamicsSpec::Kind::identity: return d;
    case DynamicsSpec::Kind::dephase: return apply_predual(dephasing_map(spec.dephase_p), d);
    case DynamicsSpec::Kind::mean_field: {
      const auto v = resolve_potential(spec.potential, cfg.memory_guard);
      return hartree_evolve(v, d, spec.period, IntegratorConfig{cfg.dt, false}, cfg.hbar).density;
    }
  }
  return d;
}

}  // namespace

DiscreteMeasure limit_law(const DynamicsSpec& spec, const DiscreteMeasure& p, const MeasurementBasis& basis,
                          const ExperimentConfig& cfg) {
  const DensityOperator mean = encode_discrete(p, StatePreparation::projective(basis));
  return read_probability(limit_density(spec, mean, cfg), projective_povm(basis));
}

TransitionKernel scenario_kernel(const DynamicsSpec& spec, int n, const MeasurementBasis& basis,
                                 const ExperimentConfig& cfg) {
  switch (spec.kind) {
    case DynamicsSpec::Kind::identity: return TransitionKernel::identity(basis.d(), n);
    case DynamicsSpec::Kind::dephase:
      return kernel_tensor_power(derived_kernel_single(dephasing_map(spec.dephase_p), basis), n);
    case DynamicsSpec::Kind::mean_field: {
      const MeanFieldSystem sys(resolve_potential(spec.potential, cfg.memory_guard), n, cfg.hbar, cfg.memory_guard);
      return derived_kernel_n(unitary_to_kraus(sys, spec.period), basis);
    }
  }
  return TransitionKernel::identity(basis.d(), n);
}

ScenarioResult run_spohn_convergence(const ExperimentConfig& cfg) {
  ScenarioResult result;
  const auto v = resolve_potential(cfg.potential, cfg.memory_guard);
  const auto d0 = resolve_single_site_state(cfg.initial_state, cfg.d);
  const IntegratorConfig integrator{cfg.dt, false};
  const long steps = std::lround(cfg.t / cfg.dt);
  const int record_every = static_cast<int>(std::max(1L, steps / 100));
  const auto trajectory = hartree_trajectory(v, d0, cfg.t, integrator, cfg.hbar, record_every);
  const DensityOperator& limit = trajectory.back().density;

  QuantumFamily family;
  std::map<int, double> runtime;
  for (int n : cfg.n_values) {
    const auto start = Clock::now();
    const MeanFieldSystem sys(v, n, cfg.hbar, cfg.memory_guard);
    family.emplace_back(n, MeanFieldPropagator(sys).evolve(tensor_power(d0, n), cfg.t));
    runtime[n] = elapsed_ms(start);
  }
  for (int k : cfg.k_values) {
    add_profile(result, cfg, "k" + std::to_string(k), chaos_profile_quantum(family, limit, k), runtime);
  }

  std::ostringstream traj;
  traj << csv_header(cfg, {{"potential", cfg.potential.is_string() ? cfg.potential.get<std::string>() : "custom"},
                           {"dt", format_double(cfg.dt)}});
  write_trajectory_csv(traj, trajectory);
  result.files.push_back({"hartree_trajectory.csv", traj.str()});
  result.extra["hartree_final"] = operator_to_json(limit.op());
  return result;
}

ScenarioResult run_measurement_chain(const ExperimentConfig& cfg) {
  ScenarioResult result;
  const auto basis = resolve_basis(cfg.basis, cfg.d);
  const auto p = single_site_law(cfg);
  const auto q = limit_law(cfg.dynamics, p, basis, cfg);

  ClassicalFamily family;
  std::map<int, double> runtime;
  std::ostringstream chains;
  chains << csv_header(cfg, {{"dynamics", cfg.dynamics.label()}, {"chain_steps", std::to_string(cfg.chain_steps)}});
  chains << "n,step,state\n";
  for (int n : cfg.n_values) {
    const auto start = Clock::now();
    const auto kernel = scenario_kernel(cfg.dynamics, n, basis, cfg);
    const auto pn = measure_power(p, n);
    family.emplace_back(n, apply_kernel(pn, kernel));
    runtime[n] = elapsed_ms(start);

    // start state drawn from p^{⊗n}, then the chain itself on an independent stream
    std::mt19937_64 rng(split_seed(cfg.seed, 2 * static_cast<std::uint64_t>(n)));
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    std::size_t first = 0;
    for (double acc = 0.0; first + 1 < pn.size(); ++first) {
      acc += pn[first];
      if (u < acc) break;
    }
    const auto path = sample_chain(kernel, first, cfg.chain_steps, split_seed(cfg.seed, 2 * static_cast<std::uint64_t>(n) + 1));
    for (std::size_t s = 0; s < path.size(); ++s) chains << n << ',' << s << ',' << path[s] << '\n';

    std::ostringstream law;
    law << csv_header(cfg, {{"n", std::to_string(n)}, {"measure", "p_after_one_step"}});
    write_measure_csv(law, family.back().second);
    result.files.push_back({"law_n" + std::to_string(n) + ".csv", law.str()});

    if (kernel.size() <= cfg.write_kernels_max_states) {
      std::ostringstream csv;
      csv << csv_header(cfg, {{"n", std::to_string(n)}});
      write_kernel_csv(csv, kernel);
      result.files.push_back({"kernel_n" + std::to_string(n) + ".csv", csv.str()});
      const json sidecar{{"basis", cfg.basis},  {"phi", cfg.dynamics.to_json()}, {"T", cfg.dynamics.period},
                         {"n", n},              {"d", cfg.d},                    {"rng", kRngName},
                         {"seed", cfg.seed},    {"config_hash", cfg.hash()}};
      result.files.push_back({"kernel_n" + std::to_string(n) + ".json", sidecar.dump(2) + "\n"});
    }
  }
  for (int k : cfg.k_values) {
    add_profile(result, cfg, "k" + std::to_string(k), chaos_profile_classical(family, q, k), runtime);
  }
  result.files.push_back({"chains.csv", chains.str()});

  std::ostringstream limit;
  limit << csv_header(cfg, {{"measure", "limit_law"}});
  write_measure_csv(limit, q);
  result.files.push_back({"limit_law.csv", limit.str()});
  return result;
}

ScenarioResult run_kernel_composition(const ExperimentConfig& cfg) {
  ScenarioResult result;
  const auto basis = resolve_basis(cfg.basis, cfg.d);
  const auto p = single_site_law(cfg);

  // limit laws: each kernel alone from p, and the chained composition
  std::vector<DiscreteMeasure> alone;
  DiscreteMeasure chained = p;
  for (const auto& spec : cfg.kernels) {
    alone.push_back(limit_law(spec, p, basis, cfg));
    chained = limit_law(spec, chained, basis, cfg);
  }

  std::vector<ClassicalFamily> individual(cfg.kernels.size());
  ClassicalFamily composed;
  std::map<int, double> runtime;
  for (int n : cfg.n_values) {
    const auto start = Clock::now();
    const auto pn = measure_power(p, n);
    std::map<std::string, TransitionKernel> cache;
    std::optional<TransitionKernel> product;
    for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
      const auto& spec = cfg.kernels[i];
      auto it = cache.find(spec.label());
      if (it == cache.end()) it = cache.emplace(spec.label(), scenario_kernel(spec, n, basis, cfg)).first;
      individual[i].emplace_back(n, apply_kernel(pn, it->second));
      product = product ? compose_kernels(*product, it->second) : it->second;
    }
    composed.emplace_back(n, apply_kernel(pn, *product));
    runtime[n] = elapsed_ms(start);
  }
  for (int k : cfg.k_values) {
    for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
      add_profile(result, cfg, "kernel" + std::to_string(i + 1) + "_k" + std::to_string(k),
                  chaos_profile_classical(individual[i], alone[i], k), runtime);
    }
    add_profile(result, cfg, "composed_k" + std::to_string(k), chaos_profile_classical(composed, chained, k), runtime);
  }
  json order = json::array();
  for (const auto& spec : cfg.kernels) order.push_back(spec.label());
  result.extra["composition_order"] = std::move(order);
  return result;
}

ScenarioResult run_encode_read_roundtrip(const ExperimentConfig& cfg) {
  ScenarioResult result;
  const auto basis = resolve_basis(cfg.basis, cfg.d);
  const auto p = single_site_law(cfg);
  const auto prep = cfg.preparation_noise > 0.0 ? StatePreparation::noisy(basis, cfg.preparation_noise)
                                                : StatePreparation::projective(basis);
  const auto povm = projective_povm(basis);
  const auto q = read_probability(limit_density(cfg.dynamics, encode_discrete(p, prep), cfg), povm);

  ClassicalFamily family;
  std::map<int, double> runtime;
  for (int n : cfg.n_values) {
    const auto start = Clock::now();
    const DensityOperator encoded = encode_discrete(measure_power(p, n), prep);
    std::optional<DensityOperator> developed;
    switch (cfg.dynamics.kind) {
      case DynamicsSpec::Kind::identity: developed = encoded; break;
      case DynamicsSpec::Kind::dephase:
        developed = apply_predual(kraus_tensor_power(dephasing_map(cfg.dynamics.dephase_p), n), encoded);
        break;
      case DynamicsSpec::Kind::mean_field: {
        const MeanFieldSystem sys(resolve_potential(cfg.dynamics.potential, cfg.memory_guard), n, cfg.hbar,
                                  cfg.memory_guard);
        developed = MeanFieldPropagator(sys).evolve(encoded, cfg.dynamics.period);
        break;
      }
    }
    family.emplace_back(n, read_joint(*developed, povm));
    runtime[n] = elapsed_ms(start);
  }
  for (int k : cfg.k_values) {
    add_profile(result, cfg, "k" + std::to_string(k), chaos_profile_classical(family, q, k), runtime);
  }
  std::ostringstream limit;
  limit << csv_header(cfg, {{"measure", "limit_law"}});
  write_measure_csv(limit, q);
  result.files.push_back({"limit_law.csv", limit.str()});
  return result;
}

ScenarioResult run_scenario(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::spohn_convergence: return run_spohn_convergence(cfg);
    case Scenario::measurement_chain: return run_measurement_chain(cfg);
    case Scenario::kernel_composition: return run_kernel_composition(cfg);
    case Scenario::encode_read_roundtrip: return run_encode_read_roundtrip(cfg);
  }
  throw ConfigError("unhandled scenario");
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ScenarioResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate(cfg);
  std::ostream& log = options.log ? *options.log : std::cerr;
  const std::string started = utc_timestamp();
  const auto start = Clock::now();
  const std::string hash = cfg.hash();
  if (!options.quiet) {
    log << "event=start scenario=" << to_string(cfg.scenario) << " config_hash=" << hash << " seed=" << cfg.seed
        << " out=" << cfg.output_dir << '\n';
  }

  ScenarioResult result = run_scenario(cfg);

  const std::filesystem::path out(cfg.output_dir);
  std::filesystem::create_directories(out);
  for (const auto& f : result.files) write_file_atomic(out / f.name, f.contents);

  std::ostringstream report;
  report << "scenario,profile,n,k,distance,norm,config_hash\n";
  json rows = json::array();
  for (const auto& r : result.rows) {
    report << r.scenario << ',' << r.profile << ',' << r.n << ',' << r.k << ',' << format_double(r.distance) << ','
           << to_string(r.norm) << ',' << r.config_hash << '\n';
    rows.push_back({{"scenario", r.scenario},
                    {"profile", r.profile},
                    {"n", r.n},
                    {"k", r.k},
                    {"distance", r.distance},
                    {"norm", std::string(to_string(r.norm))},
                    {"runtime_ms", r.runtime_ms},
                    {"config_hash", r.config_hash}});
    if (!options.quiet) {
      log << "event=point scenario=" << r.scenario << " profile=" << r.profile << " n=" << r.n << " k=" << r.k
          << " distance=" << format_double(r.distance) << " norm=" << to_string(r.norm)
          << " runtime_ms=" << format_double(std::round(r.runtime_ms * 1000.0) / 1000.0) << '\n';
    }
  }
  write_file_atomic(out / "report.csv", report.str());

  json exponents = json::object();
  json warnings = json::array();
  for (const auto& lp : result.profiles) {
    exponents[lp.label] = lp.exponent ? json(*lp.exponent) : json(nullptr);
    for (const auto& w : lp.profile.warnings) {
      warnings.push_back(lp.label + ": " + w);
      if (!options.quiet) log << "event=warning profile=" << lp.label << " message=\"" << w << "\"\n";
    }
  }
  json files = json::array();
  for (const auto& f : result.files) files.push_back(f.name);
  files.push_back("report.csv");
  const json metadata{{"scenario", std::string(to_string(cfg.scenario))},
                      {"config", cfg.to_json()},
                      {"config_hash", hash},
                      {"rng", kRngName},
                      {"seed", cfg.seed},
                      {"started_at", started},
                      {"finished_at", utc_timestamp()},
                      {"wall_ms", elapsed_ms(start)},
                      {"rows", std::move(rows)},
                      {"scaling_exponents", std::move(exponents)},
                      {"warnings", std::move(warnings)},
                      {"files", std::move(files)},
                      {"extra", result.extra}};
  write_file_atomic(out / "metadata.json", metadata.dump(2) + "\n");
  if (!options.quiet) {
    log << "event=done scenario=" << to_string(cfg.scenario) << " wall_ms=" << format_double(std::round(elapsed_ms(start)))
        << " files=" << result.files.size() + 2 << '\n';
  }
  return result;
}

}  // namespace qchaos

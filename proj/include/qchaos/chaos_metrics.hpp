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

// Distances that quantify molecular chaos: trace norm between quantum
// k-marginals and D^{⊗k}, total variation between classical k-marginals and
// p^{⊗k}. Classical measures live on a finite alphabet J = {0..J_size-1}.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qchaos/operator.hpp"

namespace qchaos {

inline constexpr std::size_t kMaxMeasureSize = std::size_t{1} << 20;
inline constexpr double kMeasureTol = 1e-12;

// Probability vector on J^n, indexed big-endian like operator bases.
class DiscreteMeasure {
 public:
  // Weights in [-tol, 0) are clamped to zero.
  DiscreteMeasure(int j_size, int n, std::vector<double> weights, double tol = kMeasureTol);

  static DiscreteMeasure point_mass(int j_size, const std::vector<int>& atom);
  static DiscreteMeasure uniform(int j_size, int n);

  int j_size() const noexcept { return j_size_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double tol() const noexcept { return tol_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  std::vector<int> atom(std::size_t index) const;
  std::size_t index_of(const std::vector<int>& atom) const;

 private:
  int j_size_;
  int n_;
  double tol_;
  std::vector<double> weights_;
};

DiscreteMeasure product(const DiscreteMeasure& a, const DiscreteMeasure& b);
DiscreteMeasure measure_power(const DiscreteMeasure& p, int n);
// Average over all n! coordinate permutations (n <= 8).
DiscreteMeasure symmetrize(const DiscreteMeasure& p);

// Sums out the last n - k coordinates.
DiscreteMeasure classical_marginal(const DiscreteMeasure& p, int k);
bool is_symmetric_measure(const DiscreteMeasure& p, double tol = kMeasureTol);
double total_variation(const DiscreteMeasure& p, const DiscreteMeasure& q);

enum class NormTag { trace, tv };
std::string_view to_string(NormTag tag);

struct ProfilePoint {
  int n = 0;
  double distance = 0.0;
};

struct ChaosProfile {
  int k = 1;
  NormTag norm = NormTag::trace;
  std::vector<ProfilePoint> points;  // n strictly increasing
  std::vector<std::string> warnings;
};

using QuantumFamily = std::vector<std::pair<int, DensityOperator>>;
using ClassicalFamily = std::vector<std::pair<int, DiscreteMeasure>>;

// Points (n, ‖Tr^{(n-k)} D_n - D^{⊗k}‖_tr). Non-symmetric members are kept
// and reported in `warnings`.
ChaosProfile chaos_profile_quantum(const QuantumFamily& family, const DensityOperator& limit, int k);
// Points (n, TV(p_n^{(k)}, p^{⊗k})).
ChaosProfile chaos_profile_classical(const ClassicalFamily& family, const DiscreteMeasure& limit, int k);

// Least-squares slope of log(distance) against log(n). Empty when some
// distance is not strictly positive. Needs at least three points.
std::optional<double> scaling_exponent(const ChaosProfile& profile);

// `# key=value` header lines, then "n,distance" rows.
void write_profile_csv(std::ostream& os, const ChaosProfile& profile, std::string_view scenario_id,
                       const std::vector<std::pair<std::string, std::string>>& extra_meta = {});

}  // namespace qchaos

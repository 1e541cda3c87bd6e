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

// Mean-field Hamiltonians, unitary propagation and Kraus-form maps.
//
// A KrausMap {A_k} acts in the Heisenberg picture as φ(B) = Σ A_k^* B A_k;
// its predual is φ_*(D) = Σ A_k D A_k^*, so Tr(φ_*(D) B) = Tr(D φ(B)).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qchaos/operator.hpp"

namespace qchaos {

inline constexpr double kUnitalityTol = 1e-9;

// Hermitian, swap-invariant operator on two sites.
class TwoBodyPotential {
 public:
  explicit TwoBodyPotential(Operator v, double tol = kHermitianTol);

  const Operator& op() const noexcept { return v_; }
  int d() const noexcept { return v_.space().d(); }
  // largest singular value
  double operator_norm() const noexcept { return norm_; }

 private:
  Operator v_;
  double norm_;
};

// Named qubit potentials: "zero", "identity", "zz", "xx+zz", "xz+zx", "swap".
TwoBodyPotential builtin_potential(std::string_view id);
std::vector<std::string> builtin_potential_ids();

class MeanFieldSystem {
 public:
  MeanFieldSystem(TwoBodyPotential v, int n, double hbar = 1.0, std::size_t max_dim = kDefaultMaxDim);

  const TwoBodyPotential& potential() const noexcept { return v_; }
  int n() const noexcept { return space_.n(); }
  double hbar() const noexcept { return hbar_; }
  const SiteSpace& space() const noexcept { return space_; }

 private:
  TwoBodyPotential v_;
  SiteSpace space_;
  double hbar_;
};

class KrausMap {
 public:
  explicit KrausMap(std::vector<Operator> ops, double unital_tol = kUnitalityTol);

  static KrausMap identity(const SiteSpace& space);

  const std::vector<Operator>& ops() const noexcept { return ops_; }
  const SiteSpace& space() const noexcept { return ops_.front().space(); }
  // max |Σ A_k^* A_k - I|
  double unitality_deviation() const;

 private:
  std::vector<Operator> ops_;
};

// V acting on sites i < j (1-based) of n: U_π^* (V ⊗ I ⊗ ... ⊗ I) U_π with
// π(1) = i, π(2) = j.
Operator lift_pair_potential(const TwoBodyPotential& v, int i, int j, int n,
                             std::size_t max_dim = kDefaultMaxDim);

// (1/n) Σ_{i<j} V_ij
Operator mean_field_hamiltonian(const MeanFieldSystem& sys);

// Diagonalizes H_n once; e^{-iH_n t/ħ} for any t afterwards.
class MeanFieldPropagator {
 public:
  explicit MeanFieldPropagator(const MeanFieldSystem& sys);

  Operator unitary(double t) const { return eig_.unitary(t / hbar_); }
  DensityOperator evolve(const DensityOperator& d, double t) const;
  const SiteSpace& space() const noexcept { return space_; }

 private:
  SiteSpace space_;
  double hbar_;
  HermitianPropagator eig_;
};

DensityOperator evolve_state(const DensityOperator& d, const MeanFieldSystem& sys, double t);

// {e^{-iH_n T/ħ}}: the Heisenberg map B ↦ U^* B U at time T.
KrausMap unitary_to_kraus(const MeanFieldSystem& sys, double t);

Operator apply_heisenberg(const KrausMap& phi, const Operator& b);
Operator apply_predual(const KrausMap& phi, const Operator& d);
DensityOperator apply_predual(const KrausMap& phi, const DensityOperator& d);

// Single-site dephasing {sqrt(1-p) I, sqrt(p) σ_z}.
KrausMap dephasing_map(double p);
// φ^{⊗n}: Kraus operators are all n-fold tensor products.
KrausMap kraus_tensor_power(const KrausMap& phi, int n);

struct CovarianceReport {
  bool covariant = false;
  double max_deviation = 0.0;
};

// Adjacent transpositions only. Maps are probed with every matrix unit when
// dim <= 16, otherwise with a fixed set of 16 seeded random Hermitian probes.
CovarianceReport check_permutation_covariance(const KrausMap& phi, double tol);
// ‖U_π H - H U_π‖_tr
CovarianceReport check_permutation_covariance(const Operator& h, double tol);

}  // namespace qchaos

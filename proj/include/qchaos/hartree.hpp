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

// One-particle mean-field limit: dD/dt = -(i/ħ) Tr_2[V, D ⊗ D], integrated
// with fixed-step RK4.

#include <iosfwd>
#include <vector>

#include "qchaos/dynamics.hpp"
#include "qchaos/operator.hpp"

namespace qchaos {

inline constexpr double kHartreeStateTol = 1e-8;
inline constexpr double kHartreeFailureTol = 1e-6;

struct IntegratorConfig {
  double dt = 1e-3;
  // Rescale to unit trace after every step. Off by default so drift stays visible.
  bool renormalize = false;
};

struct HartreeState {
  DensityOperator density;
  double t = 0.0;
};

// V_D = Tr_2(V (I ⊗ D)), a single-site operator.
Operator effective_hamiltonian(const TwoBodyPotential& v, const Operator& d);

// -(i/ħ)[V_D, D]
Operator hartree_rhs(const TwoBodyPotential& v, const Operator& d, double hbar = 1.0);
// -(i/ħ) Tr_2[V, D ⊗ D], evaluated on the two-site space.
Operator hartree_rhs_direct(const TwoBodyPotential& v, const Operator& d, double hbar = 1.0);

// Throws InvariantError when a step leaves the density set by more than
// kHartreeFailureTol, DomainError when dt does not divide t.
HartreeState hartree_evolve(const TwoBodyPotential& v, const DensityOperator& d0, double t,
                            const IntegratorConfig& cfg = {}, double hbar = 1.0);

// States at 0, every `record_every` steps, and at t.
std::vector<HartreeState> hartree_trajectory(const TwoBodyPotential& v, const DensityOperator& d0, double t,
                                             const IntegratorConfig& cfg = {}, double hbar = 1.0,
                                             int record_every = 1);

// Columns: t, re_<r>_<c>, im_<r>_<c> for every entry, min_eig, trace_dev.
void write_trajectory_csv(std::ostream& os, const std::vector<HartreeState>& trajectory);

}  // namespace qchaos

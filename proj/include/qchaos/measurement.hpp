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

// Reading quantum states with POVMs, encoding classical measures as
// densities, and the Markov kernels obtained by preparing, evolving and
// measuring.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qchaos/chaos_metrics.hpp"
#include "qchaos/dynamics.hpp"
#include "qchaos/operator.hpp"

namespace qchaos {

inline constexpr double kKernelTol = 1e-9;
inline constexpr double kKernelDust = 1e-12;
inline constexpr double kPovmPsdTol = 1e-10;
inline constexpr double kBasisTol = 1e-10;

// Orthonormal basis of C^d given as the columns of a unitary; label j is column j.
class MeasurementBasis {
 public:
  explicit MeasurementBasis(Matrix columns, double tol = kBasisTol);

  static MeasurementBasis computational(int d);
  // (e_0 ± e_1)/sqrt(2)
  static MeasurementBasis hadamard();

  int d() const noexcept { return static_cast<int>(columns_.rows()); }
  const Matrix& columns() const noexcept { return columns_; }
  Vector vector(int j) const { return columns_.col(j); }

 private:
  Matrix columns_;
};

class Povm {
 public:
  explicit Povm(std::vector<Operator> elements);

  int j_size() const noexcept { return static_cast<int>(elements_.size()); }
  int d() const noexcept { return elements_.front().space().d(); }
  const std::vector<Operator>& elements() const noexcept { return elements_; }

 private:
  std::vector<Operator> elements_;
};

// Single-site densities D(j), j in J.
class StatePreparation {
 public:
  explicit StatePreparation(std::vector<DensityOperator> states);

  static StatePreparation projective(const MeasurementBasis& basis);
  // (1 - eps) |e_j><e_j| + eps I/d
  static StatePreparation noisy(const MeasurementBasis& basis, double eps);

  int j_size() const noexcept { return static_cast<int>(states_.size()); }
  int d() const noexcept { return states_.front().space().d(); }
  const std::vector<DensityOperator>& states() const noexcept { return states_; }

 private:
  std::vector<DensityOperator> states_;
};

// Row-stochastic matrix on J^n; rows are the current state.
class TransitionKernel {
 public:
  // Entries in [-kKernelDust, 0) are clamped to zero; anything more negative,
  // or a row sum off by more than tol, throws InvariantError.
  TransitionKernel(int j_size, int n, Eigen::MatrixXd matrix, double tol = kKernelTol);

  static TransitionKernel identity(int j_size, int n);

  int j_size() const noexcept { return j_size_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  double operator()(std::size_t from, std::size_t to) const {
    return matrix_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }

 private:
  int j_size_;
  int n_;
  Eigen::MatrixXd matrix_;
};

Povm projective_povm(const MeasurementBasis& basis);

// w_j = Tr(D X(j))
DiscreteMeasure read_probability(const DensityOperator& d, const Povm& x);
// w_(j1..jn) = Tr(D_n X(j1) ⊗ ... ⊗ X(jn)), contracted one site at a time.
DiscreteMeasure read_joint(const DensityOperator& d, const Povm& x);

// Σ_j p(j) D(j1) ⊗ ... ⊗ D(jn)
DensityOperator encode_discrete(const DiscreteMeasure& p, const StatePreparation& prep);
// Finite-grid stand-in for the integral of D(ω1) ⊗ ... ⊗ D(ωn) against an
// n-fold law: grid point s carries the density sample_states[s] and
// joint_weights is a measure on grid^n. Sums term by term.
DensityOperator encode_weighted_samples(const std::vector<DensityOperator>& sample_states,
                                        const DiscreteMeasure& joint_weights);

// K(j, j') = Tr(P_{e_j} φ(P_{e_j'})) for a single-site map.
TransitionKernel derived_kernel_single(const KrausMap& phi, const MeasurementBasis& basis);
// K(j, j') = Tr(Q_j φ(Q_j')) with Q_j = |e_j1><e_j1| ⊗ ... ⊗ |e_jn><e_jn|,
// evaluated as Σ_k |<e_j'| A_k |e_j>|^2.
TransitionKernel derived_kernel_n(const KrausMap& phi, const MeasurementBasis& basis);

enum class Picture { heisenberg, schrodinger };
// Same kernel by building every Q_j densely: Tr(Q_j φ(Q_j')) in the
// Heisenberg picture, Tr(φ_*(Q_j) Q_j') in the Schrödinger picture.
// Limited to dim <= 64.
TransitionKernel derived_kernel_n_literal(const KrausMap& phi, const MeasurementBasis& basis, Picture picture);

// K(j, j') = Tr[(D(j1) ⊗ ... ⊗ D(jn)) φ(X(j'1) ⊗ ... ⊗ X(j'n))]
TransitionKernel general_kernel(const StatePreparation& prep, const Povm& x, const KrausMap& phi);

// Kronecker power: the kernel of a product map φ^{⊗n} from that of φ.
TransitionKernel kernel_tensor_power(const TransitionKernel& k, int n);

// p' = p^T K
DiscreteMeasure apply_kernel(const DiscreteMeasure& p, const TransitionKernel& k);
// Chain order: first k, then l.
TransitionKernel compose_kernels(const TransitionKernel& k, const TransitionKernel& l);

// max |K(π·j, π·j') - K(j, j')| over adjacent transpositions π.
double kernel_equivariance_deviation(const TransitionKernel& k);

inline constexpr const char* kRngName = "mt19937_64";
// splitmix64 mixing of (seed, stream): independent seeds for parallel paths.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);
// States j_0 = start, j_1, ..., j_steps drawn by inverse CDF over row sums.
std::vector<std::size_t> sample_chain(const TransitionKernel& k, std::size_t start, std::size_t steps,
                                      std::uint64_t seed);

// One dense row per line, full precision.
void write_kernel_csv(std::ostream& os, const TransitionKernel& k);
// "index,weight" rows.
void write_measure_csv(std::ostream& os, const DiscreteMeasure& p);

}  // namespace qchaos

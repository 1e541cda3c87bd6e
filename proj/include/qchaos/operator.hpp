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

// Dense operators on tensor powers of C^d.
//
// Basis states of (C^d)^{⊗n} are indexed big-endian: the digit of site 1 is
// the most significant. With this ordering V ⊗ I is block structured and
// tracing out trailing sites sums contiguous blocks.

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qchaos {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kDefaultMaxDim = 4096;
inline constexpr double kDensityTol = 1e-9;
inline constexpr double kHermitianTol = 1e-10;

// base^exp, throwing MemoryGuardError once the result exceeds cap.
std::size_t guarded_power(std::size_t base, int exp, std::size_t cap);

class SiteSpace {
 public:
  SiteSpace(int d, int n, std::size_t max_dim = kDefaultMaxDim);

  int d() const noexcept { return d_; }
  int n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t max_dim() const noexcept { return max_dim_; }

  // Same d, different site count; inherits the guard.
  SiteSpace with_sites(int n) const { return SiteSpace(d_, n, max_dim_); }

  std::vector<int> digits(std::size_t index) const;
  std::size_t index_of(const std::vector<int>& digits) const;

  friend bool operator==(const SiteSpace& a, const SiteSpace& b) noexcept {
    return a.d_ == b.d_ && a.n_ == b.n_;
  }

 private:
  int d_;
  int n_;
  std::size_t max_dim_;
  std::size_t dim_;
};

std::string to_string(const SiteSpace& space);

class Operator {
 public:
  Operator(SiteSpace space, Matrix entries);

  static Operator identity(const SiteSpace& space);
  static Operator zero(const SiteSpace& space);
  // Single-site operator (n = 1, d = rows).
  static Operator single_site(Matrix entries);

  const SiteSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return entries_; }
  std::size_t dim() const noexcept { return space_.dim(); }

  Complex trace() const { return entries_.trace(); }
  Operator adjoint() const { return Operator(space_, entries_.adjoint()); }
  // max |A - A^*| entrywise
  double hermitian_deviation() const;
  bool is_hermitian(double tol = kHermitianTol) const { return hermitian_deviation() <= tol; }

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);

 private:
  SiteSpace space_;
  Matrix entries_;
};

struct DensityDiagnostics {
  double hermitian_deviation = 0.0;
  double min_eigenvalue = 0.0;
  double trace_deviation = 0.0;

  bool within(double tol) const {
    return hermitian_deviation <= tol && min_eigenvalue >= -tol && trace_deviation <= tol;
  }
};

DensityDiagnostics diagnose_density(const Operator& op);

// Hermitian, positive semidefinite, unit trace; checked on construction.
class DensityOperator {
 public:
  explicit DensityOperator(Operator op, double tol = kDensityTol);

  const Operator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  const SiteSpace& space() const noexcept { return op_.space(); }
  std::size_t dim() const noexcept { return op_.dim(); }
  double tol() const noexcept { return tol_; }

 private:
  Operator op_;
  double tol_;
};

// A bijection of {1..n}, stored 1-based as images[s-1] = π(s).
class PermutationSpec {
 public:
  explicit PermutationSpec(std::vector<int> images);

  static PermutationSpec identity(int n);
  // Swaps sites i and j (1-based).
  static PermutationSpec transposition(int n, int i, int j);

  int size() const noexcept { return static_cast<int>(images_.size()); }
  int operator()(int s) const { return images_.at(static_cast<std::size_t>(s - 1)); }
  const std::vector<int>& images() const noexcept { return images_; }

  PermutationSpec inverse() const;
  // (this ∘ other)(s) = this(other(s))
  PermutationSpec after(const PermutationSpec& other) const;
  int sign() const;

  friend bool operator==(const PermutationSpec&, const PermutationSpec&) = default;

 private:
  std::vector<int> images_;
};

Operator tensor(const Operator& a, const Operator& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
Operator tensor_power(const Operator& a, int n);
DensityOperator tensor_power(const DensityOperator& a, int n);

// Traces out the last n - k sites.
Operator partial_trace(const Operator& a, int k);
DensityOperator partial_trace(const DensityOperator& d, int k);

double trace_norm(const Operator& a);
double trace_norm(const Matrix& a);
double min_eigenvalue(const Operator& a);
Eigen::VectorXd eigenvalues(const Operator& a);

// Basis map of U_π: U_π e_b = e_{map[b]}.
std::vector<std::size_t> permutation_index_map(const PermutationSpec& pi, const SiteSpace& space);
Operator permutation_unitary(const PermutationSpec& pi, const SiteSpace& space);
// U_π^* A U_π by index relabelling; equals the dense triple product.
Operator conjugate_by_permutation(const Operator& a, const PermutationSpec& pi);

enum class SymmetryClass { none, symmetric, bose, fermi };

std::string_view to_string(SymmetryClass c);
SymmetryClass symmetry_class(const DensityOperator& d, double tol = kHermitianTol);

// Eigendecomposition of a Hermitian operator, reusable for e^{-iθH} at many θ.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const Operator& h, double hermitian_tol = kHermitianTol);

  // e^{-iθH}
  Operator unitary(double theta) const;
  const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }

 private:
  SiteSpace space_;
  Eigen::VectorXd values_;
  Matrix vectors_;
};

Operator herm_expm(const Operator& h, double theta);

DensityOperator pure_state_projector(const Vector& v, const SiteSpace& space);
DensityOperator pure_state_projector(const Vector& v);

namespace pauli {
Matrix x();
Matrix y();
Matrix z();
}  // namespace pauli

}  // namespace qchaos

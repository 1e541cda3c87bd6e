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

#include "qchaos/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qchaos/errors.hpp"

namespace qchaos {

std::size_t guarded_power(std::size_t base, int exp, std::size_t cap) {
  std::size_t result = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && result > cap / base) {
      throw MemoryGuardError("dimension " + std::to_string(base) + "^" + std::to_string(exp) +
                             " exceeds the memory guard " + std::to_string(cap));
    }
    result *= base;
  }
  if (result > cap) {
    throw MemoryGuardError("dimension " + std::to_string(result) + " exceeds the memory guard " +
                           std::to_string(cap));
  }
  return result;
}

SiteSpace::SiteSpace(int d, int n, std::size_t max_dim) : d_(d), n_(n), max_dim_(max_dim), dim_(0) {
  if (d < 1 || n < 1) {
    throw DomainError("site space needs d >= 1 and n >= 1, got d=" + std::to_string(d) +
                      " n=" + std::to_string(n));
  }
  dim_ = guarded_power(static_cast<std::size_t>(d), n, max_dim);
}

std::vector<int> SiteSpace::digits(std::size_t index) const {
  std::vector<int> out(static_cast<std::size_t>(n_));
  for (int s = n_ - 1; s >= 0; --s) {
    out[static_cast<std::size_t>(s)] = static_cast<int>(index % static_cast<std::size_t>(d_));
    index /= static_cast<std::size_t>(d_);
  }
  return out;
}

std::size_t SiteSpace::index_of(const std::vector<int>& digits) const {
  std::size_t index = 0;
  for (int digit : digits) index = index * static_cast<std::size_t>(d_) + static_cast<std::size_t>(digit);
  return index;
}

std::string to_string(const SiteSpace& space) {
  std::ostringstream os;
  os << "(C^" << space.d() << ")^" << space.n();
  return os.str();
}

Operator::Operator(SiteSpace space, Matrix entries) : space_(space), entries_(std::move(entries)) {
  const auto dim = static_cast<Eigen::Index>(space_.dim());
  if (entries_.rows() != dim || entries_.cols() != dim) {
    throw DimensionError("operator on " + to_string(space_) + " needs a " + std::to_string(dim) +
                         "x" + std::to_string(dim) + " matrix, got " +
                         std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()));
  }
}

Operator Operator::identity(const SiteSpace& space) {
  const auto dim = static_cast<Eigen::Index>(space.dim());
  return Operator(space, Matrix::Identity(dim, dim));
}

Operator Operator::zero(const SiteSpace& space) {
  const auto dim = static_cast<Eigen::Index>(space.dim());
  return Operator(space, Matrix::Zero(dim, dim));
}

Operator Operator::single_site(Matrix entries) {
  const auto d = static_cast<int>(entries.rows());
  return Operator(SiteSpace(d, 1), std::move(entries));
}

double Operator::hermitian_deviation() const {
  if (entries_.size() == 0) return 0.0;
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

void require_same_space(const Operator& a, const Operator& b, const char* what) {
  if (!(a.space() == b.space())) {
    throw DimensionError(std::string(what) + ": operands live on " + to_string(a.space()) +
                         " and " + to_string(b.space()));
  }
}

}  // namespace

Operator operator+(const Operator& a, const Operator& b) {
  require_same_space(a, b, "operator+");
  return Operator(a.space_, a.entries_ + b.entries_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_space(a, b, "operator-");
  return Operator(a.space_, a.entries_ - b.entries_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_space(a, b, "operator*");
  return Operator(a.space_, a.entries_ * b.entries_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(a.space_, s * a.entries_); }

DensityDiagnostics diagnose_density(const Operator& op) {
  DensityDiagnostics out;
  out.hermitian_deviation = op.hermitian_deviation();
  out.trace_deviation = std::abs(op.trace() - Complex(1.0, 0.0));
  out.min_eigenvalue = min_eigenvalue(op);
  return out;
}

DensityOperator::DensityOperator(Operator op, double tol) : op_(std::move(op)), tol_(tol) {
  if (tol < 0.0) throw DomainError("density tolerance must be nonnegative");
  const auto diag = diagnose_density(op_);
  if (!diag.within(tol)) {
    std::ostringstream os;
    os << "not a density operator within tol=" << tol << ": hermitian_dev=" << diag.hermitian_deviation
       << " min_eig=" << diag.min_eigenvalue << " trace_dev=" << diag.trace_deviation;
    throw InvariantError(os.str());
  }
}

PermutationSpec::PermutationSpec(std::vector<int> images) : images_(std::move(images)) {
  const int n = static_cast<int>(images_.size());
  if (n < 1) throw DomainError("permutation must act on at least one site");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : images_) {
    if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)]) {
      throw DomainError("images do not form a permutation of 1.." + std::to_string(n));
    }
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
}

PermutationSpec PermutationSpec::identity(int n) {
  std::vector<int> images(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(images.begin(), images.end(), 1);
  return PermutationSpec(std::move(images));
}

PermutationSpec PermutationSpec::transposition(int n, int i, int j) {
  auto images = identity(n).images_;
  if (i < 1 || i > n || j < 1 || j > n) throw DomainError("transposition index out of range");
  std::swap(images[static_cast<std::size_t>(i - 1)], images[static_cast<std::size_t>(j - 1)]);
  return PermutationSpec(std::move(images));
}

PermutationSpec PermutationSpec::inverse() const {
  std::vector<int> inv(images_.size());
  for (std::size_t s = 0; s < images_.size(); ++s) inv[static_cast<std::size_t>(images_[s] - 1)] = static_cast<int>(s + 1);
  return PermutationSpec(std::move(inv));
}

PermutationSpec PermutationSpec::after(const PermutationSpec& other) const {
  if (other.size() != size()) throw DimensionError("composing permutations of different lengths");
  std::vector<int> out(images_.size());
  for (int s = 1; s <= size(); ++s) out[static_cast<std::size_t>(s - 1)] = (*this)(other(s));
  return PermutationSpec(std::move(out));
}

int PermutationSpec::sign() const {
  // parity from cycle decomposition
  std::vector<bool> visited(images_.size(), false);
  int transpositions = 0;
  for (std::size_t s = 0; s < images_.size(); ++s) {
    if (visited[s]) continue;
    int length = 0;
    for (std::size_t c = s; !visited[c]; c = static_cast<std::size_t>(images_[c] - 1)) {
      visited[c] = true;
      ++length;
    }
    transpositions += length - 1;
  }
  return transpositions % 2 == 0 ? 1 : -1;
}

Operator tensor(const Operator& a, const Operator& b) {
  if (a.space().d() != b.space().d()) {
    throw DimensionError("tensor: site dimensions differ (" + std::to_string(a.space().d()) + " vs " +
                         std::to_string(b.space().d()) + ")");
  }
  SiteSpace space(a.space().d(), a.space().n() + b.space().n(), a.space().max_dim());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  const auto na = static_cast<Eigen::Index>(a.dim());
  Matrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) {
      out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    }
  }
  return Operator(space, std::move(out));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(tensor(a.op(), b.op()), std::max(a.tol(), b.tol()));
}

Operator tensor_power(const Operator& a, int n) {
  if (n < 1) throw DomainError("tensor power needs n >= 1");
  // fail before allocating anything large
  guarded_power(a.dim(), n, a.space().max_dim());
  Operator out = a;
  for (int i = 1; i < n; ++i) out = tensor(out, a);
  return out;
}

DensityOperator tensor_power(const DensityOperator& a, int n) {
  return DensityOperator(tensor_power(a.op(), n), a.tol());
}

Operator partial_trace(const Operator& a, int k) {
  const int n = a.space().n();
  if (k < 1 || k > n) {
    throw DomainError("partial_trace: k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  if (k == n) return a;
  SiteSpace kept = a.space().with_sites(k);
  const auto keep = static_cast<Eigen::Index>(kept.dim());
  const auto rest = static_cast<Eigen::Index>(a.dim() / kept.dim());
  Matrix out(keep, keep);
  for (Eigen::Index i = 0; i < keep; ++i) {
    for (Eigen::Index j = 0; j < keep; ++j) {
      out(i, j) = a.matrix().block(i * rest, j * rest, rest, rest).trace();
    }
  }
  return Operator(kept, std::move(out));
}

DensityOperator partial_trace(const DensityOperator& d, int k) {
  return DensityOperator(partial_trace(d.op(), k), d.tol());
}

namespace {

bool nearly_hermitian(const Matrix& a) {
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

}  // namespace

double trace_norm(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("trace_norm: matrix is not square");
  if (a.size() == 0) return 0.0;
  if (nearly_hermitian(a)) {
    const Matrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double trace_norm(const Operator& a) { return trace_norm(a.matrix()); }

Eigen::VectorXd eigenvalues(const Operator& a) {
  const Matrix h = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const Operator& a) { return eigenvalues(a).minCoeff(); }

std::vector<std::size_t> permutation_index_map(const PermutationSpec& pi, const SiteSpace& space) {
  if (pi.size() != space.n()) {
    throw DimensionError("permutation of length " + std::to_string(pi.size()) + " applied to " +
                         to_string(space));
  }
  std::vector<std::size_t> map(space.dim());
  std::vector<int> out(static_cast<std::size_t>(space.n()));
  for (std::size_t b = 0; b < space.dim(); ++b) {
    const auto in = space.digits(b);
    for (int s = 1; s <= space.n(); ++s) {
      out[static_cast<std::size_t>(s - 1)] = in[static_cast<std::size_t>(pi(s) - 1)];
    }
    map[b] = space.index_of(out);
  }
  return map;
}

Operator permutation_unitary(const PermutationSpec& pi, const SiteSpace& space) {
  const auto map = permutation_index_map(pi, space);
  Operator u = Operator::zero(space);
  Matrix m = u.matrix();
  for (std::size_t b = 0; b < map.size(); ++b) {
    m(static_cast<Eigen::Index>(map[b]), static_cast<Eigen::Index>(b)) = 1.0;
  }
  return Operator(space, std::move(m));
}

Operator conjugate_by_permutation(const Operator& a, const PermutationSpec& pi) {
  const auto map = permutation_index_map(pi, a.space());
  const auto dim = static_cast<Eigen::Index>(a.dim());
  Matrix out(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto mr = static_cast<Eigen::Index>(map[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < dim; ++c) {
      out(r, c) = a.matrix()(mr, static_cast<Eigen::Index>(map[static_cast<std::size_t>(c)]));
    }
  }
  return Operator(a.space(), std::move(out));
}

std::string_view to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::none: return "none";
    case SymmetryClass::symmetric: return "symmetric";
    case SymmetryClass::bose: return "bose";
    case SymmetryClass::fermi: return "fermi";
  }
  return "none";
}

namespace {

// ‖m‖_F <= ‖m‖_tr <= sqrt(dim)‖m‖_F settles most cases without a decomposition.
bool trace_norm_within(const Matrix& m, double tol) {
  const double frob = m.norm();
  if (frob > tol) return false;
  if (frob * std::sqrt(static_cast<double>(m.rows())) <= tol) return true;
  return trace_norm(m) <= tol;
}

}  // namespace

SymmetryClass symmetry_class(const DensityOperator& d, double tol) {
  const SiteSpace& space = d.space();
  // A single site carries no exchange structure.
  if (space.n() == 1) return SymmetryClass::symmetric;

  const Matrix& m = d.matrix();
  const auto dim = static_cast<Eigen::Index>(d.dim());
  bool symmetric = true;
  bool bose = true;
  bool fermi = true;
  for (int s = 1; s < space.n(); ++s) {
    const auto map = permutation_index_map(PermutationSpec::transposition(space.n(), s, s + 1), space);
    Matrix ud(dim, dim);  // U D: rows permuted
    Matrix du(dim, dim);  // D U: columns permuted
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        ud(r, c) = m(static_cast<Eigen::Index>(map[static_cast<std::size_t>(r)]), c);
        du(r, c) = m(r, static_cast<Eigen::Index>(map[static_cast<std::size_t>(c)]));
      }
    }
    symmetric = symmetric && trace_norm_within(ud - du, tol);
    bose = bose && trace_norm_within(du - m, tol);
    fermi = fermi && trace_norm_within(du + m, tol);
  }
  if (symmetric && fermi) return SymmetryClass::fermi;
  if (symmetric && bose) return SymmetryClass::bose;
  if (symmetric) return SymmetryClass::symmetric;
  return SymmetryClass::none;
}

HermitianPropagator::HermitianPropagator(const Operator& h, double hermitian_tol) : space_(h.space()) {
  const double dev = h.hermitian_deviation();
  if (dev > hermitian_tol) {
    throw DomainError("herm_expm: operator is not Hermitian (deviation " + std::to_string(dev) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.matrix() + h.matrix().adjoint()));
  values_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

Operator HermitianPropagator::unitary(double theta) const {
  const Vector phases = (values_.cast<Complex>() * Complex(0.0, -theta)).array().exp().matrix();
  Matrix u = vectors_ * phases.asDiagonal() * vectors_.adjoint();
  return Operator(space_, std::move(u));
}

Operator herm_expm(const Operator& h, double theta) { return HermitianPropagator(h).unitary(theta); }

DensityOperator pure_state_projector(const Vector& v, const SiteSpace& space) {
  if (static_cast<std::size_t>(v.size()) != space.dim()) {
    throw DimensionError("pure_state_projector: vector length " + std::to_string(v.size()) +
                         " does not match " + to_string(space));
  }
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DomainError("pure_state_projector: zero vector");
  const Vector unit = v / norm;
  return DensityOperator(Operator(space, unit * unit.adjoint()));
}

DensityOperator pure_state_projector(const Vector& v) {
  return pure_state_projector(v, SiteSpace(static_cast<int>(v.size()), 1));
}

namespace pauli {

Matrix x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace pauli

}  // namespace qchaos

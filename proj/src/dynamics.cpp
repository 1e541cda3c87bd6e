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

#include "qchaos/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qchaos/errors.hpp"

namespace qchaos {

TwoBodyPotential::TwoBodyPotential(Operator v, double tol) : v_(std::move(v)), norm_(0.0) {
  if (v_.space().n() != 2) {
    throw DimensionError("two-body potential must act on two sites, got " + to_string(v_.space()));
  }
  const double herm = v_.hermitian_deviation();
  if (herm > tol) {
    throw DomainError("two-body potential is not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const Operator swapped = conjugate_by_permutation(v_, PermutationSpec::transposition(2, 1, 2));
  const double swap_dev = (swapped.matrix() - v_.matrix()).cwiseAbs().maxCoeff();
  if (swap_dev > tol) {
    throw DomainError("two-body potential is not swap symmetric (deviation " + std::to_string(swap_dev) + ")");
  }
  Eigen::JacobiSVD<Matrix> svd(v_.matrix());
  norm_ = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

namespace {

Operator two_site(const Matrix& a, const Matrix& b) {
  return tensor(Operator::single_site(a), Operator::single_site(b));
}

}  // namespace

TwoBodyPotential builtin_potential(std::string_view id) {
  const SiteSpace pair(2, 2);
  if (id == "zero") return TwoBodyPotential(Operator::zero(pair));
  if (id == "identity") return TwoBodyPotential(Operator::identity(pair));
  if (id == "zz") return TwoBodyPotential(two_site(pauli::z(), pauli::z()));
  if (id == "xx+zz") {
    return TwoBodyPotential(Complex(0.5) * (two_site(pauli::x(), pauli::x()) + two_site(pauli::z(), pauli::z())));
  }
  if (id == "xz+zx") {
    return TwoBodyPotential(two_site(pauli::x(), pauli::z()) + two_site(pauli::z(), pauli::x()));
  }
  if (id == "swap") return TwoBodyPotential(permutation_unitary(PermutationSpec::transposition(2, 1, 2), pair));
  throw DomainError("unknown potential id '" + std::string(id) + "'");
}

std::vector<std::string> builtin_potential_ids() {
  return {"zero", "identity", "zz", "xx+zz", "xz+zx", "swap"};
}

MeanFieldSystem::MeanFieldSystem(TwoBodyPotential v, int n, double hbar, std::size_t max_dim)
    : v_(std::move(v)), space_(v_.d(), std::max(n, 1), max_dim), hbar_(hbar) {
  if (n < 2) throw DomainError("mean-field system needs n >= 2, got " + std::to_string(n));
  if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
}

KrausMap::KrausMap(std::vector<Operator> ops, double unital_tol) : ops_(std::move(ops)) {
  if (ops_.empty()) throw DomainError("Kraus map needs at least one operator");
  for (const auto& a : ops_) {
    if (!(a.space() == ops_.front().space())) throw DimensionError("Kraus operators live on different spaces");
  }
  const double dev = unitality_deviation();
  if (dev > unital_tol) {
    throw InvariantError("Kraus map is not unital: max|Σ A*A - I| = " + std::to_string(dev));
  }
}

KrausMap KrausMap::identity(const SiteSpace& space) { return KrausMap({Operator::identity(space)}); }

double KrausMap::unitality_deviation() const {
  const auto dim = static_cast<Eigen::Index>(space().dim());
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& a : ops_) sum.noalias() += a.matrix().adjoint() * a.matrix();
  return (sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
}

Operator lift_pair_potential(const TwoBodyPotential& v, int i, int j, int n, std::size_t max_dim) {
  if (n < 2 || i < 1 || j > n || i >= j) {
    throw DomainError("lift_pair_potential: need 1 <= i < j <= n, got i=" + std::to_string(i) +
                      " j=" + std::to_string(j) + " n=" + std::to_string(n));
  }
  const SiteSpace space(v.d(), n, max_dim);
  Operator v12(SiteSpace(v.d(), 2, max_dim), v.op().matrix());
  if (n > 2) v12 = tensor(v12, Operator::identity(space.with_sites(n - 2)));
  const auto pi = PermutationSpec::transposition(n, 1, i).after(PermutationSpec::transposition(n, 2, j));
  return conjugate_by_permutation(v12, pi);
}

Operator mean_field_hamiltonian(const MeanFieldSystem& sys) {
  const int n = sys.n();
  const SiteSpace& space = sys.space();
  Operator v12(space.with_sites(2), sys.potential().op().matrix());
  if (n > 2) v12 = tensor(v12, Operator::identity(space.with_sites(n - 2)));

  const auto dim = static_cast<Eigen::Index>(space.dim());
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i < n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const auto pi = PermutationSpec::transposition(n, 1, i).after(PermutationSpec::transposition(n, 2, j));
      h += conjugate_by_permutation(v12, pi).matrix();
    }
  }
  h /= static_cast<double>(n);
  return Operator(space, std::move(h));
}

MeanFieldPropagator::MeanFieldPropagator(const MeanFieldSystem& sys)
    : space_(sys.space()), hbar_(sys.hbar()), eig_(mean_field_hamiltonian(sys)) {}

DensityOperator MeanFieldPropagator::evolve(const DensityOperator& d, double t) const {
  if (!(d.space() == space_)) {
    throw DimensionError("evolve_state: density on " + to_string(d.space()) + ", system on " + to_string(space_));
  }
  const Operator u = unitary(t);
  Matrix out = u.matrix() * d.matrix() * u.matrix().adjoint();
  return DensityOperator(Operator(d.space(), std::move(out)), d.tol());
}

DensityOperator evolve_state(const DensityOperator& d, const MeanFieldSystem& sys, double t) {
  if (!(d.space() == sys.space())) {
    throw DimensionError("evolve_state: density on " + to_string(d.space()) + ", system on " +
                         to_string(sys.space()));
  }
  return MeanFieldPropagator(sys).evolve(d, t);
}

KrausMap unitary_to_kraus(const MeanFieldSystem& sys, double t) {
  return KrausMap({MeanFieldPropagator(sys).unitary(t)});
}

namespace {

void require_map_space(const KrausMap& phi, const SiteSpace& space, const char* what) {
  if (!(phi.space() == space)) {
    throw DimensionError(std::string(what) + ": map on " + to_string(phi.space()) + ", operand on " +
                         to_string(space));
  }
}

}  // namespace

Operator apply_heisenberg(const KrausMap& phi, const Operator& b) {
  require_map_space(phi, b.space(), "apply_heisenberg");
  const auto dim = static_cast<Eigen::Index>(b.dim());
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& a : phi.ops()) out.noalias() += a.matrix().adjoint() * b.matrix() * a.matrix();
  return Operator(b.space(), std::move(out));
}

Operator apply_predual(const KrausMap& phi, const Operator& d) {
  require_map_space(phi, d.space(), "apply_predual");
  const auto dim = static_cast<Eigen::Index>(d.dim());
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& a : phi.ops()) out.noalias() += a.matrix() * d.matrix() * a.matrix().adjoint();
  return Operator(d.space(), std::move(out));
}

DensityOperator apply_predual(const KrausMap& phi, const DensityOperator& d) {
  return DensityOperator(apply_predual(phi, d.op()), d.tol());
}

KrausMap dephasing_map(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("dephasing probability must lie in [0, 1]");
  return KrausMap({Operator::single_site(std::sqrt(1.0 - p) * Matrix::Identity(2, 2)),
                   Operator::single_site(std::sqrt(p) * pauli::z())});
}

KrausMap kraus_tensor_power(const KrausMap& phi, int n) {
  if (n < 1) throw DomainError("kraus_tensor_power needs n >= 1");
  const SiteSpace& single = phi.space();
  if (single.n() != 1) throw DimensionError("kraus_tensor_power expects a single-site map");
  const SiteSpace space = single.with_sites(n);
  // every Kraus operator is dense, so bound the total entry count as well
  const std::size_t count = guarded_power(phi.ops().size(), n, std::size_t{1} << 24);
  guarded_power(space.dim(), 2, (std::size_t{1} << 24) / count);

  std::vector<Operator> ops = phi.ops();
  for (int s = 1; s < n; ++s) {
    std::vector<Operator> next;
    next.reserve(ops.size() * phi.ops().size());
    for (const auto& a : ops) {
      for (const auto& b : phi.ops()) next.push_back(tensor(a, b));
    }
    ops = std::move(next);
  }
  return KrausMap(std::move(ops));
}

namespace {

std::vector<Matrix> covariance_probes(Eigen::Index dim) {
  std::vector<Matrix> probes;
  if (dim <= 16) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        Matrix e = Matrix::Zero(dim, dim);
        e(r, c) = 1.0;
        probes.push_back(std::move(e));
      }
    }
    return probes;
  }
  std::mt19937_64 rng(0x5eedc0de);
  std::normal_distribution<double> normal;
  for (int p = 0; p < 16; ++p) {
    Matrix a(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = Complex(normal(rng), normal(rng));
    }
    probes.push_back(0.5 * (a + a.adjoint()));
  }
  return probes;
}

}  // namespace

CovarianceReport check_permutation_covariance(const KrausMap& phi, double tol) {
  const SiteSpace& space = phi.space();
  CovarianceReport report{true, 0.0};
  if (space.n() < 2) return report;
  const auto probes = covariance_probes(static_cast<Eigen::Index>(space.dim()));
  for (int s = 1; s < space.n(); ++s) {
    const auto pi = PermutationSpec::transposition(space.n(), s, s + 1);
    for (const auto& probe : probes) {
      const Operator a(space, probe);
      const Operator lhs = apply_heisenberg(phi, conjugate_by_permutation(a, pi));
      const Operator rhs = conjugate_by_permutation(apply_heisenberg(phi, a), pi);
      report.max_deviation = std::max(report.max_deviation, trace_norm(lhs.matrix() - rhs.matrix()));
    }
  }
  report.covariant = report.max_deviation <= tol;
  return report;
}

CovarianceReport check_permutation_covariance(const Operator& h, double tol) {
  const SiteSpace& space = h.space();
  CovarianceReport report{true, 0.0};
  for (int s = 1; s < space.n(); ++s) {
    const Operator u = permutation_unitary(PermutationSpec::transposition(space.n(), s, s + 1), space);
    report.max_deviation = std::max(report.max_deviation, trace_norm((u * h - h * u).matrix()));
  }
  report.covariant = report.max_deviation <= tol;
  return report;
}

}  // namespace qchaos

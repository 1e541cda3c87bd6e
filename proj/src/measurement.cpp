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

#include "qchaos/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "qchaos/errors.hpp"
#include "qchaos/format.hpp"

namespace qchaos {

MeasurementBasis::MeasurementBasis(Matrix columns, double tol) : columns_(std::move(columns)) {
  if (columns_.rows() < 1 || columns_.rows() != columns_.cols()) {
    throw DimensionError("measurement basis must be a nonempty square matrix of columns");
  }
  const auto d = columns_.rows();
  const double dev = (columns_.adjoint() * columns_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > tol) throw DomainError("basis columns are not orthonormal (deviation " + format_double(dev) + ")");
}

MeasurementBasis MeasurementBasis::computational(int d) {
  if (d < 1) throw DomainError("basis dimension must be positive");
  return MeasurementBasis(Matrix::Identity(d, d));
}

MeasurementBasis MeasurementBasis::hadamard() {
  Matrix h(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  return MeasurementBasis(std::move(h));
}

Povm::Povm(std::vector<Operator> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw DomainError("POVM needs at least one element");
  const SiteSpace& space = elements_.front().space();
  if (space.n() != 1) throw DimensionError("POVM elements must be single-site operators");
  const auto d = static_cast<Eigen::Index>(space.dim());
  Matrix sum = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < elements_.size(); ++j) {
    const auto& x = elements_[j];
    if (!(x.space() == space)) throw DimensionError("POVM elements live on different spaces");
    if (x.hermitian_deviation() > kPovmPsdTol || min_eigenvalue(x) < -kPovmPsdTol) {
      throw DomainError("POVM element " + std::to_string(j) + " is not positive semidefinite");
    }
    sum += x.matrix();
  }
  const double dev = (sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > kUnitalityTol) {
    throw DomainError("POVM elements do not sum to the identity (deviation " + format_double(dev) + ")");
  }
}

StatePreparation::StatePreparation(std::vector<DensityOperator> states) : states_(std::move(states)) {
  if (states_.empty()) throw DomainError("state preparation needs at least one state");
  for (const auto& s : states_) {
    if (s.space().n() != 1 || !(s.space() == states_.front().space())) {
      throw DimensionError("prepared states must be single-site densities on a common space");
    }
  }
}

StatePreparation StatePreparation::projective(const MeasurementBasis& basis) {
  std::vector<DensityOperator> states;
  for (int j = 0; j < basis.d(); ++j) states.push_back(pure_state_projector(basis.vector(j)));
  return StatePreparation(std::move(states));
}

StatePreparation StatePreparation::noisy(const MeasurementBasis& basis, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("noise level must lie in [0, 1]");
  const int d = basis.d();
  std::vector<DensityOperator> states;
  for (int j = 0; j < d; ++j) {
    const Vector e = basis.vector(j);
    Matrix m = (1.0 - eps) * (e * e.adjoint()) + (eps / d) * Matrix::Identity(d, d);
    states.emplace_back(Operator::single_site(std::move(m)));
  }
  return StatePreparation(std::move(states));
}

TransitionKernel::TransitionKernel(int j_size, int n, Eigen::MatrixXd matrix, double tol)
    : j_size_(j_size), n_(n), matrix_(std::move(matrix)) {
  if (j_size < 1 || n < 1) throw DomainError("kernel needs J_size >= 1 and n >= 1");
  const auto states = static_cast<Eigen::Index>(guarded_power(static_cast<std::size_t>(j_size), n, kDefaultMaxDim));
  if (matrix_.rows() != states || matrix_.cols() != states) {
    throw DimensionError("kernel on J^n needs a " + std::to_string(states) + "x" + std::to_string(states) +
                         " matrix");
  }
  for (Eigen::Index r = 0; r < states; ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < states; ++c) {
      double& v = matrix_(r, c);
      if (!std::isfinite(v) || v < -kKernelDust) {
        throw InvariantError("kernel entry (" + std::to_string(r) + "," + std::to_string(c) + ") = " +
                             format_double(v) + " is negative");
      }
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw InvariantError("kernel row " + std::to_string(r) + " sums to " + format_double(sum));
    }
  }
}

TransitionKernel TransitionKernel::identity(int j_size, int n) {
  const auto states = static_cast<Eigen::Index>(guarded_power(static_cast<std::size_t>(j_size), n, kDefaultMaxDim));
  return TransitionKernel(j_size, n, Eigen::MatrixXd::Identity(states, states));
}

Povm projective_povm(const MeasurementBasis& basis) {
  std::vector<Operator> elements;
  for (int j = 0; j < basis.d(); ++j) {
    const Vector e = basis.vector(j);
    elements.push_back(Operator::single_site(e * e.adjoint()));
  }
  return Povm(std::move(elements));
}

namespace {

// out[j] = Tr(m F(j1) ⊗ ... ⊗ F(jn)), j big-endian. Each pass folds the
// leading site of every partial result against each family member.
std::vector<Complex> contract_with_products(const Matrix& m, int d, int n, const std::vector<const Matrix*>& family) {
  std::vector<Matrix> level{m};
  Eigen::Index dim = m.rows();
  for (int s = 0; s < n; ++s) {
    const Eigen::Index rest = dim / d;
    std::vector<Matrix> next;
    next.reserve(level.size() * family.size());
    for (const auto& cur : level) {
      for (const Matrix* f : family) {
        Matrix acc = Matrix::Zero(rest, rest);
        for (Eigen::Index a = 0; a < d; ++a) {
          for (Eigen::Index b = 0; b < d; ++b) {
            const Complex coef = (*f)(b, a);
            if (coef != Complex(0.0, 0.0)) acc.noalias() += coef * cur.block(a * rest, b * rest, rest, rest);
          }
        }
        next.push_back(std::move(acc));
      }
    }
    level = std::move(next);
    dim = rest;
  }
  std::vector<Complex> out;
  out.reserve(level.size());
  for (const auto& scalar : level) out.push_back(scalar(0, 0));
  return out;
}

std::vector<double> real_weights(const std::vector<Complex>& values, double tol, const char* what) {
  std::vector<double> w;
  w.reserve(values.size());
  for (const auto& v : values) {
    if (std::abs(v.imag()) > tol) {
      throw InvariantError(std::string(what) + ": probability with imaginary part " + format_double(v.imag()));
    }
    w.push_back(v.real());
  }
  return w;
}

}  // namespace

DiscreteMeasure read_joint(const DensityOperator& d, const Povm& x) {
  if (d.space().d() != x.d()) {
    throw DimensionError("read_joint: density on " + to_string(d.space()) + ", POVM on C^" + std::to_string(x.d()));
  }
  std::vector<const Matrix*> family;
  for (const auto& e : x.elements()) family.push_back(&e.matrix());
  const auto values = contract_with_products(d.matrix(), d.space().d(), d.space().n(), family);
  const double tol = std::max(kMeasureTol, d.tol());
  return DiscreteMeasure(x.j_size(), d.space().n(), real_weights(values, tol, "read_joint"), tol);
}

DiscreteMeasure read_probability(const DensityOperator& d, const Povm& x) {
  if (d.space().n() != 1) throw DimensionError("read_probability expects a single-site density");
  return read_joint(d, x);
}

namespace {

// Σ_j w(j) D(j1) ⊗ ... ⊗ D(jn) over a block of J^n, leading coordinate first.
Matrix encode_block(const double* w, std::size_t count, int n, const StatePreparation& prep) {
  const auto j_size = static_cast<std::size_t>(prep.j_size());
  const auto d = static_cast<Eigen::Index>(prep.d());
  if (n == 1) {
    Matrix out = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < j_size; ++j) {
      if (w[j] != 0.0) out += w[j] * prep.states()[j].matrix();
    }
    return out;
  }
  const std::size_t stride = count / j_size;
  Eigen::Index rest = 1;
  for (int s = 1; s < n; ++s) rest *= d;
  Matrix out = Matrix::Zero(d * rest, d * rest);
  for (std::size_t j = 0; j < j_size; ++j) {
    const double* sub = w + j * stride;
    if (std::all_of(sub, sub + stride, [](double v) { return v == 0.0; })) continue;
    const Matrix tail = encode_block(sub, stride, n - 1, prep);
    const Matrix& head = prep.states()[j].matrix();
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        if (head(a, b) != Complex(0.0, 0.0)) out.block(a * rest, b * rest, rest, rest) += head(a, b) * tail;
      }
    }
  }
  return out;
}

}  // namespace

DensityOperator encode_discrete(const DiscreteMeasure& p, const StatePreparation& prep) {
  if (p.j_size() != prep.j_size()) {
    throw DimensionError("encode_discrete: measure alphabet has " + std::to_string(p.j_size()) +
                         " letters, preparation has " + std::to_string(prep.j_size()) + " states");
  }
  const SiteSpace space(prep.d(), p.n());
  return DensityOperator(Operator(space, encode_block(p.weights().data(), p.size(), p.n(), prep)));
}

DensityOperator encode_weighted_samples(const std::vector<DensityOperator>& sample_states,
                                        const DiscreteMeasure& joint_weights) {
  if (sample_states.empty() || static_cast<int>(sample_states.size()) != joint_weights.j_size()) {
    throw DimensionError("encode_weighted_samples: weights are over a grid of " +
                         std::to_string(joint_weights.j_size()) + " points, got " +
                         std::to_string(sample_states.size()) + " sample densities");
  }
  const SiteSpace& single = sample_states.front().space();
  for (const auto& s : sample_states) {
    if (s.space().n() != 1 || !(s.space() == single)) {
      throw DimensionError("sample densities must be single-site on a common space");
    }
  }
  const SiteSpace space(single.d(), joint_weights.n());
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(space.dim()), static_cast<Eigen::Index>(space.dim()));
  for (std::size_t i = 0; i < joint_weights.size(); ++i) {
    const double w = joint_weights[i];
    if (w == 0.0) continue;
    const auto atom = joint_weights.atom(i);
    Operator term = sample_states[static_cast<std::size_t>(atom[0])].op();
    for (std::size_t s = 1; s < atom.size(); ++s) {
      term = tensor(term, sample_states[static_cast<std::size_t>(atom[s])].op());
    }
    acc += w * term.matrix();
  }
  return DensityOperator(Operator(space, std::move(acc)));
}

namespace {

void require_basis_matches(const KrausMap& phi, const MeasurementBasis& basis, const char* what) {
  if (phi.space().d() != basis.d()) {
    throw DimensionError(std::string(what) + ": map on " + to_string(phi.space()) + ", basis of C^" +
                         std::to_string(basis.d()));
  }
}

Matrix basis_power(const MeasurementBasis& basis, const SiteSpace& space) {
  return tensor_power(Operator(space.with_sites(1), basis.columns()), space.n()).matrix();
}

}  // namespace

TransitionKernel derived_kernel_n(const KrausMap& phi, const MeasurementBasis& basis) {
  require_basis_matches(phi, basis, "derived_kernel_n");
  const SiteSpace& space = phi.space();
  const Matrix b = basis_power(basis, space);
  const auto dim = static_cast<Eigen::Index>(space.dim());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& a : phi.ops()) {
    const Matrix w = b.adjoint() * a.matrix() * b;  // w(j', j) = <e_j'|A|e_j>
    k += w.cwiseAbs2().transpose();
  }
  return TransitionKernel(basis.d(), space.n(), std::move(k));
}

TransitionKernel derived_kernel_single(const KrausMap& phi, const MeasurementBasis& basis) {
  if (phi.space().n() != 1) throw DimensionError("derived_kernel_single expects a single-site map");
  return derived_kernel_n(phi, basis);
}

TransitionKernel derived_kernel_n_literal(const KrausMap& phi, const MeasurementBasis& basis, Picture picture) {
  require_basis_matches(phi, basis, "derived_kernel_n_literal");
  const SiteSpace& space = phi.space();
  if (space.dim() > 64) throw MemoryGuardError("derived_kernel_n_literal is limited to dim <= 64");
  const auto dim = static_cast<Eigen::Index>(space.dim());

  // Q_j as a tensor product of single-site projectors
  std::vector<Operator> projectors;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const auto digits = space.digits(static_cast<std::size_t>(j));
    Operator q = pure_state_projector(basis.vector(digits[0])).op();
    for (std::size_t s = 1; s < digits.size(); ++s) {
      q = tensor(q, pure_state_projector(basis.vector(digits[s])).op());
    }
    projectors.emplace_back(space, q.matrix());
  }

  Eigen::MatrixXd k(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index jp = 0; jp < dim; ++jp) {
      const auto& qj = projectors[static_cast<std::size_t>(j)];
      const auto& qjp = projectors[static_cast<std::size_t>(jp)];
      const Complex v = picture == Picture::heisenberg ? (qj * apply_heisenberg(phi, qjp)).trace()
                                                       : (apply_predual(phi, qj) * qjp).trace();
      k(j, jp) = v.real();
    }
  }
  return TransitionKernel(basis.d(), space.n(), std::move(k));
}

TransitionKernel general_kernel(const StatePreparation& prep, const Povm& x, const KrausMap& phi) {
  if (prep.j_size() != x.j_size()) throw DimensionError("general_kernel: preparation and POVM index sets differ");
  if (prep.d() != x.d() || phi.space().d() != x.d()) throw DimensionError("general_kernel: site dimensions differ");
  const SiteSpace& space = phi.space();
  const int n = space.n();
  const auto states = static_cast<Eigen::Index>(
      guarded_power(static_cast<std::size_t>(x.j_size()), n, kDefaultMaxDim));

  std::vector<const Matrix*> prepared;
  for (const auto& s : prep.states()) prepared.push_back(&s.matrix());

  Eigen::MatrixXd k(states, states);
  const DiscreteMeasure shape = DiscreteMeasure::uniform(x.j_size(), n);
  for (Eigen::Index jp = 0; jp < states; ++jp) {
    const auto atom = shape.atom(static_cast<std::size_t>(jp));
    Operator xs = x.elements()[static_cast<std::size_t>(atom[0])];
    for (std::size_t s = 1; s < atom.size(); ++s) xs = tensor(xs, x.elements()[static_cast<std::size_t>(atom[s])]);
    const Operator evolved = apply_heisenberg(phi, Operator(space, xs.matrix()));
    const auto column = contract_with_products(evolved.matrix(), space.d(), n, prepared);
    const auto real = real_weights(column, kKernelTol, "general_kernel");
    for (Eigen::Index j = 0; j < states; ++j) k(j, jp) = real[static_cast<std::size_t>(j)];
  }
  return TransitionKernel(x.j_size(), n, std::move(k));
}

TransitionKernel kernel_tensor_power(const TransitionKernel& k, int n) {
  if (k.n() != 1) throw DimensionError("kernel_tensor_power expects a single-coordinate kernel");
  if (n < 1) throw DomainError("kernel_tensor_power needs n >= 1");
  guarded_power(k.size(), n, kDefaultMaxDim);
  Eigen::MatrixXd out = k.matrix();
  for (int s = 1; s < n; ++s) {
    const Eigen::Index rest = k.matrix().rows();
    Eigen::MatrixXd next(out.rows() * rest, out.cols() * rest);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        next.block(r * rest, c * rest, rest, rest) = out(r, c) * k.matrix();
      }
    }
    out = std::move(next);
  }
  return TransitionKernel(k.j_size(), n, std::move(out));
}

DiscreteMeasure apply_kernel(const DiscreteMeasure& p, const TransitionKernel& k) {
  if (p.j_size() != k.j_size() || p.n() != k.n()) throw DimensionError("apply_kernel: measure and kernel shapes differ");
  const Eigen::Map<const Eigen::VectorXd> w(p.weights().data(), static_cast<Eigen::Index>(p.size()));
  const Eigen::VectorXd out = k.matrix().transpose() * w;
  return DiscreteMeasure(p.j_size(), p.n(), std::vector<double>(out.data(), out.data() + out.size()),
                         std::max(p.tol(), kKernelTol));
}

TransitionKernel compose_kernels(const TransitionKernel& k, const TransitionKernel& l) {
  if (k.j_size() != l.j_size() || k.n() != l.n()) throw DimensionError("compose_kernels: shapes differ");
  return TransitionKernel(k.j_size(), k.n(), k.matrix() * l.matrix());
}

double kernel_equivariance_deviation(const TransitionKernel& k) {
  const DiscreteMeasure shape = DiscreteMeasure::uniform(k.j_size(), k.n());
  double worst = 0.0;
  for (int s = 0; s + 1 < k.n(); ++s) {
    std::vector<std::size_t> map(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      auto atom = shape.atom(i);
      std::swap(atom[static_cast<std::size_t>(s)], atom[static_cast<std::size_t>(s + 1)]);
      map[i] = shape.index_of(atom);
    }
    for (std::size_t a = 0; a < k.size(); ++a) {
      for (std::size_t b = 0; b < k.size(); ++b) worst = std::max(worst, std::abs(k(map[a], map[b]) - k(a, b)));
    }
  }
  return worst;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> sample_chain(const TransitionKernel& k, std::size_t start, std::size_t steps,
                                      std::uint64_t seed) {
  if (start >= k.size()) throw DomainError("sample_chain: start state out of range");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> path{start};
  path.reserve(steps + 1);
  std::size_t current = start;
  const auto states = static_cast<Eigen::Index>(k.size());
  for (std::size_t step = 0; step < steps; ++step) {
    // 53 random bits -> uniform in [0, 1)
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const auto row = k.matrix().row(static_cast<Eigen::Index>(current));
    const double target = u * row.sum();
    double cumulative = 0.0;
    Eigen::Index next = states - 1;
    for (Eigen::Index c = 0; c < states; ++c) {
      cumulative += row(c);
      if (target < cumulative) {
        next = c;
        break;
      }
    }
    // skip trailing zero-probability states reached through rounding
    while (next > 0 && row(next) == 0.0) --next;
    current = static_cast<std::size_t>(next);
    path.push_back(current);
  }
  return path;
}

void write_kernel_csv(std::ostream& os, const TransitionKernel& k) {
  for (Eigen::Index r = 0; r < k.matrix().rows(); ++r) {
    for (Eigen::Index c = 0; c < k.matrix().cols(); ++c) {
      if (c > 0) os << ',';
      os << format_double(k.matrix()(r, c));
    }
    os << '\n';
  }
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& p) {
  os << "index,weight\n";
  for (std::size_t i = 0; i < p.size(); ++i) os << i << ',' << format_double(p[i]) << '\n';
}

}  // namespace qchaos

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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qchaos/errors.hpp"

using namespace qchaos;

namespace {

DensityOperator from_matrix(const Matrix& m, int d, int n) { return DensityOperator(Operator(SiteSpace(d, n), m)); }

// w(j) = Tr(D X(j1) ⊗ ... ⊗ X(jn)) with the product built densely.
std::vector<double> read_by_traces(const Matrix& d, const std::vector<Matrix>& povm, int n) {
  const int j_size = static_cast<int>(povm.size());
  const std::size_t count = oracle::ipow(static_cast<std::size_t>(j_size), n);
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) {
    Matrix x = povm[static_cast<std::size_t>(oracle::digit(i, 1, j_size, n))];
    for (int s = 2; s <= n; ++s) x = oracle::kron(x, povm[static_cast<std::size_t>(oracle::digit(i, s, j_size, n))]);
    w[i] = (d * x).trace().real();
  }
  return w;
}

std::vector<Matrix> povm_matrices(const Povm& x) {
  std::vector<Matrix> out;
  for (const auto& e : x.elements()) out.push_back(e.matrix());
  return out;
}

// Random three-outcome qubit POVM: X(j) = W_j^* W_j from row blocks of an isometry.
Povm random_povm(std::mt19937_64& rng) {
  const Matrix w = oracle::random_unitary(6, rng);
  std::vector<Operator> elems;
  for (int j = 0; j < 3; ++j) {
    const Matrix b = w.block(2 * j, 0, 2, 2);
    elems.push_back(Operator::single_site(b.adjoint() * b));
  }
  return Povm(elems);
}

KrausMap sigma_x_rotation(double t) { return KrausMap({herm_expm(Operator::single_site(pauli::x()), t)}); }

}  // namespace

TEST(povm, projective_examples) {
  const auto comp = projective_povm(MeasurementBasis::computational(2));
  EXPECT_TRUE(comp.elements()[0].matrix().isApprox((Matrix(2, 2) << 1, 0, 0, 0).finished()));
  EXPECT_TRUE(comp.elements()[1].matrix().isApprox((Matrix(2, 2) << 0, 0, 0, 1).finished()));
  const auto had = projective_povm(MeasurementBasis::hadamard());
  EXPECT_LT((had.elements()[0].matrix() - Matrix::Constant(2, 2, 0.5)).norm(), 1e-15);
  EXPECT_LT((had.elements()[1].matrix().cwiseAbs() - Matrix::Constant(2, 2, 0.5)).norm(), 1e-15);
  EXPECT_LT((had.elements()[0].matrix() + had.elements()[1].matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(povm, validation) {
  EXPECT_THROW(Povm({Operator::single_site(0.5 * Matrix::Identity(2, 2))}), DomainError);
  EXPECT_THROW(Povm({Operator::single_site(pauli::z()), Operator::single_site(Matrix::Identity(2, 2) - pauli::z())}),
               DomainError);
  EXPECT_THROW(MeasurementBasis((Matrix(2, 2) << 1, 1, 0, 1).finished()), DomainError);
}

TEST(read_probability, examples) {
  const auto comp = projective_povm(MeasurementBasis::computational(3));
  for (int j = 0; j < 3; ++j) {
    const auto w = read_probability(pure_state_projector(Vector::Unit(3, j)), comp);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[static_cast<std::size_t>(i)], i == j ? 1.0 : 0.0, 1e-15);
  }
  const auto u = read_probability(from_matrix(Matrix::Identity(3, 3) / 3.0, 3, 1), comp);
  for (double x : u.weights()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  const auto h = read_probability(pure_state_projector(Vector::Unit(2, 0)), projective_povm(MeasurementBasis::hadamard()));
  EXPECT_NEAR(h[0], 0.5, 1e-15);
  EXPECT_NEAR(h[1], 0.5, 1e-15);
}

TEST(read_joint, factorizes_on_products) {
  std::mt19937_64 rng(301);
  const auto x = random_povm(rng);
  const DensityOperator d(Operator::single_site(oracle::random_density(2, rng)));
  const auto single = read_probability(d, x);
  const auto joint = read_joint(tensor_power(d, 4), x);
  EXPECT_LT(total_variation(joint, measure_power(single, 4)), 1e-14);
}

TEST(read_joint, bell_state) {
  Vector phi(4);
  phi << 1, 0, 0, 1;
  const auto w = read_joint(pure_state_projector(phi, SiteSpace(2, 2)), projective_povm(MeasurementBasis::computational(2)));
  EXPECT_NEAR(w[0], 0.5, 1e-15);
  EXPECT_NEAR(w[1], 0.0, 1e-15);
  EXPECT_NEAR(w[2], 0.0, 1e-15);
  EXPECT_NEAR(w[3], 0.5, 1e-15);
}

TEST(read_joint, matches_dense_traces) {
  std::mt19937_64 rng(303);
  for (int n = 1; n <= 4; ++n) {
    const auto x = random_povm(rng);
    const auto dim = static_cast<Eigen::Index>(oracle::ipow(2, n));
    const Matrix d = oracle::random_density(dim, rng);
    const auto expected = read_by_traces(d, povm_matrices(x), n);
    const auto w = read_joint(from_matrix(d, 2, n), x);
    ASSERT_EQ(w.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(w[i], expected[i], 1e-13);
  }
}

TEST(encode_discrete, examples) {
  const auto prep = StatePreparation::projective(MeasurementBasis::computational(2));
  const auto point = encode_discrete(DiscreteMeasure::point_mass(2, {1, 0, 1}), prep);
  EXPECT_NEAR(point.matrix()(5, 5).real(), 1.0, 1e-15);
  EXPECT_NEAR(point.matrix().cwiseAbs().sum(), 1.0, 1e-15);
  const auto corr = encode_discrete(DiscreteMeasure(2, 2, {0.5, 0, 0, 0.5}), prep);
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 0.5;
  EXPECT_LT((corr.matrix() - expected).norm(), 1e-15);
}

TEST(encode_discrete, product_law_factorizes) {
  std::mt19937_64 rng(307);
  std::vector<DensityOperator> states;
  for (int j = 0; j < 3; ++j) states.emplace_back(Operator::single_site(oracle::random_density(2, rng)));
  const StatePreparation prep(states);
  const DiscreteMeasure p(3, 1, {0.2, 0.5, 0.3});
  Matrix mean = Matrix::Zero(2, 2);
  for (int j = 0; j < 3; ++j) mean += p[static_cast<std::size_t>(j)] * states[static_cast<std::size_t>(j)].matrix();
  const auto enc = encode_discrete(measure_power(p, 3), prep);
  EXPECT_LT((enc.matrix() - oracle::kron_power(mean, 3)).norm(), 1e-14);
}

TEST(encode_weighted_samples, agrees_with_encode_discrete) {
  std::mt19937_64 rng(311);
  std::vector<DensityOperator> states;
  for (int j = 0; j < 2; ++j) states.emplace_back(Operator::single_site(oracle::random_density(2, rng)));
  const DiscreteMeasure p(2, 3, {0.1, 0.05, 0.2, 0.15, 0.1, 0.1, 0.25, 0.05});
  const auto a = encode_discrete(p, StatePreparation(states));
  const auto b = encode_weighted_samples(states, p);
  EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  const auto single = encode_weighted_samples({states[0]}, DiscreteMeasure::point_mass(1, {0, 0, 0}));
  EXPECT_LT((single.matrix() - oracle::kron_power(states[0].matrix(), 3)).norm(), 1e-14);
}

TEST(encode_weighted_samples, bloch_grid) {
  const double c = 1.0 / std::sqrt(3.0);
  const std::vector<std::array<double, 3>> dirs{{c, c, c}, {c, -c, -c}, {-c, c, -c}, {-c, -c, c}};
  std::vector<DensityOperator> states;
  for (const auto& r : dirs) {
    states.emplace_back(Operator::single_site(
        0.5 * (Matrix::Identity(2, 2) + r[0] * pauli::x() + r[1] * pauli::y() + r[2] * pauli::z())));
  }
  const DiscreteMeasure w(4, 1, {0.1, 0.2, 0.3, 0.4});
  Matrix mean = Matrix::Zero(2, 2);
  for (int j = 0; j < 4; ++j) mean += w[static_cast<std::size_t>(j)] * states[static_cast<std::size_t>(j)].matrix();
  const auto out = encode_weighted_samples(states, measure_power(w, 2));
  EXPECT_LT((out.matrix() - oracle::kron(mean, mean)).norm(), 1e-14);
}

TEST(derived_kernel, single_site_examples) {
  const auto comp = MeasurementBasis::computational(2);
  EXPECT_EQ(derived_kernel_single(KrausMap::identity(SiteSpace(2, 1)), comp).matrix(), Eigen::MatrixXd::Identity(2, 2));
  for (double t : {0.3, 1.1, 2.0}) {
    const auto k = derived_kernel_single(sigma_x_rotation(t), comp);
    EXPECT_NEAR(k(0, 1), std::pow(std::sin(t), 2), 1e-14);
    EXPECT_NEAR(k(0, 0), std::pow(std::cos(t), 2), 1e-14);
  }
  const auto deph = derived_kernel_single(dephasing_map(0.4), comp);
  EXPECT_LT((deph.matrix() - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(derived_kernel_n(KrausMap::identity(SiteSpace(2, 3)), comp).matrix(), Eigen::MatrixXd::Identity(8, 8));
}

TEST(derived_kernel, mean_field_n2_against_brute_force) {
  const auto v = builtin_potential("xx+zz");
  for (double t : {0.5, 1.0}) {
    const auto k = derived_kernel_n(unitary_to_kraus(MeanFieldSystem(v, 2), t), MeasurementBasis::computational(2));
    const Matrix u = oracle::expm_unitary(oracle::mean_field_h(v.op().matrix(), 2, 2), t);
    EXPECT_LT((k.matrix() - oracle::unitary_kernel(u, Matrix::Identity(4, 4))).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(derived_kernel, pictures_agree) {
  std::mt19937_64 rng(313);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    const auto dim = static_cast<Eigen::Index>(oracle::ipow(2, n));
    std::vector<Operator> ops;
    const Matrix w = oracle::random_unitary(2 * dim, rng);
    for (int b = 0; b < 2; ++b) ops.emplace_back(SiteSpace(2, n), w.block(b * dim, 0, dim, dim));
    const KrausMap phi(ops);
    const auto basis = trial % 2 ? MeasurementBasis::hadamard() : MeasurementBasis::computational(2);
    const auto fast = derived_kernel_n(phi, basis).matrix();
    const auto heis = derived_kernel_n_literal(phi, basis, Picture::heisenberg).matrix();
    const auto schr = derived_kernel_n_literal(phi, basis, Picture::schrodinger).matrix();
    EXPECT_LT((heis - schr).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((fast - heis).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(derived_kernel_n_literal(KrausMap::identity(SiteSpace(2, 7)), MeasurementBasis::computational(2),
                                        Picture::heisenberg),
               MemoryGuardError);
}

TEST(derived_kernel, product_map_is_kronecker_power) {
  const auto phi = sigma_x_rotation(0.7);
  const auto basis = MeasurementBasis::hadamard();
  const auto k1 = derived_kernel_single(phi, basis);
  const auto direct = derived_kernel_n(kraus_tensor_power(phi, 3), basis);
  EXPECT_LT((kernel_tensor_power(k1, 3).matrix() - direct.matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(general_kernel, examples) {
  const auto basis = MeasurementBasis::computational(2);
  const auto x = projective_povm(basis);
  const auto id = general_kernel(StatePreparation::projective(basis), x, KrausMap::identity(SiteSpace(2, 2)));
  EXPECT_LT((id.matrix() - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-15);
  const double eps = 0.2;
  const auto noisy = general_kernel(StatePreparation::noisy(basis, eps), x, KrausMap::identity(SiteSpace(2, 1)));
  EXPECT_NEAR(noisy(0, 0), 1 - eps / 2, 1e-15);
  EXPECT_NEAR(noisy(0, 1), eps / 2, 1e-15);
  EXPECT_NEAR(noisy(1, 1), 1 - eps / 2, 1e-15);
  // with projective preparation and read-out it reduces to the derived kernel
  const auto phi = unitary_to_kraus(MeanFieldSystem(builtin_potential("xz+zx"), 3), 0.6);
  const auto g = general_kernel(StatePreparation::projective(basis), x, phi);
  EXPECT_LT((g.matrix() - derived_kernel_n(phi, basis).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(transition_kernel, validation_and_apply) {
  EXPECT_THROW(TransitionKernel(2, 1, (Eigen::MatrixXd(2, 2) << 0.5, 0.6, 0, 1).finished()), InvariantError);
  EXPECT_THROW(TransitionKernel(2, 1, (Eigen::MatrixXd(2, 2) << 1.1, -0.1, 0, 1).finished()), InvariantError);
  EXPECT_THROW(TransitionKernel(2, 2, Eigen::MatrixXd::Identity(2, 2)), DimensionError);
  const TransitionKernel k(2, 1, (Eigen::MatrixXd(2, 2) << 0.9, 0.1, 0.2, 0.8).finished());
  const DiscreteMeasure p(2, 1, {0.7, 0.3});
  EXPECT_EQ(apply_kernel(p, TransitionKernel::identity(2, 1)).weights(), p.weights());
  const auto out = apply_kernel(p, k);
  EXPECT_NEAR(out[0], 0.69, 1e-15);
  EXPECT_NEAR(out[1], 0.31, 1e-15);
  EXPECT_NEAR(apply_kernel(DiscreteMeasure::point_mass(2, {1}), k)[0], 0.2, 1e-15);
}

TEST(compose_kernels, identity_and_equivariance) {
  const auto basis = MeasurementBasis::computational(2);
  const auto k = derived_kernel_n(unitary_to_kraus(MeanFieldSystem(builtin_potential("xx+zz"), 3), 0.4), basis);
  const auto l = derived_kernel_n(unitary_to_kraus(MeanFieldSystem(builtin_potential("xz+zx"), 3), 0.9), basis);
  EXPECT_LT((compose_kernels(k, TransitionKernel::identity(2, 3)).matrix() - k.matrix()).norm(), 1e-15);
  EXPECT_LT(kernel_equivariance_deviation(k), 1e-12);
  EXPECT_LT(kernel_equivariance_deviation(compose_kernels(k, l)), 1e-12);
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(4, 4);
  shift(0, 1) = shift(1, 2) = shift(2, 3) = shift(3, 0) = 1.0;
  EXPECT_GT(kernel_equivariance_deviation(TransitionKernel(2, 2, shift)), 0.5);
}

TEST(compose_kernels, measurement_breaks_group_property) {
  const auto basis = MeasurementBasis::computational(2);
  const auto a = derived_kernel_single(sigma_x_rotation(M_PI / 4), basis);
  const auto composed = compose_kernels(a, a);
  const auto direct = derived_kernel_single(sigma_x_rotation(M_PI / 2), basis);
  EXPECT_NEAR(direct(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(composed(0, 1), 0.5, 1e-15);
}

TEST(sample_chain, deterministic_cases) {
  EXPECT_EQ(sample_chain(TransitionKernel::identity(2, 2), 2, 5, 1), (std::vector<std::size_t>(6, 2)));
  Eigen::MatrixXd cycle = Eigen::MatrixXd::Zero(3, 3);
  cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = 1.0;
  EXPECT_EQ(sample_chain(TransitionKernel(3, 1, cycle), 1, 4, 9), (std::vector<std::size_t>{1, 2, 0, 1, 2}));
  EXPECT_THROW(sample_chain(TransitionKernel(3, 1, cycle), 3, 4, 9), DomainError);
}

TEST(sample_chain, reproducible_and_unbiased) {
  const TransitionKernel k(2, 1, (Eigen::MatrixXd(2, 2) << 0.9, 0.1, 0.3, 0.7).finished());
  const auto a = sample_chain(k, 0, 20000, split_seed(5, 0));
  EXPECT_EQ(a, sample_chain(k, 0, 20000, split_seed(5, 0)));
  EXPECT_NE(a, sample_chain(k, 0, 20000, split_seed(5, 1)));
  // stationary law (0.75, 0.25)
  const double ones = static_cast<double>(std::count(a.begin(), a.end(), 1u)) / static_cast<double>(a.size());
  EXPECT_NEAR(ones, 0.25, 0.02);
}

TEST(serialization, kernel_and_measure_csv) {
  std::ostringstream k, m;
  write_kernel_csv(k, TransitionKernel(2, 1, (Eigen::MatrixXd(2, 2) << 0.9, 0.1, 0.25, 0.75).finished()));
  EXPECT_EQ(k.str(), "0.9,0.1\n0.25,0.75\n");
  write_measure_csv(m, DiscreteMeasure(2, 1, {0.7, 0.3}));
  EXPECT_EQ(m.str(), "index,weight\n0,0.7\n1,0.3\n");
}

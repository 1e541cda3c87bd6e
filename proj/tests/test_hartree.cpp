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

#include "qchaos/hartree.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qchaos/errors.hpp"

using namespace qchaos;

namespace {

DensityOperator bloch(double x, double y, double z) {
  return DensityOperator(
      Operator::single_site(0.5 * (Matrix::Identity(2, 2) + x * pauli::x() + y * pauli::y() + z * pauli::z())));
}

DensityOperator plus_state() {
  Vector v(2);
  v << 1, 1;
  return pure_state_projector(v);
}

// Tr_2(V (I ⊗ D)) by explicit sums over the traced index.
Matrix effective_by_loops(const Matrix& v, const Matrix& d) {
  const int n = static_cast<int>(d.rows());
  Matrix out = Matrix::Zero(n, n);
  const Matrix w = v * oracle::kron(Matrix::Identity(n, n), d);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) out(a, b) += w(a * n + c, b * n + c);
  return out;
}

double max_error(const DensityOperator& a, const Matrix& b) { return (a.matrix() - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(effective_hamiltonian, examples) {
  const auto zz = builtin_potential("zz");
  for (double m : {-0.6, 0.0, 0.35, 1.0}) {
    const auto d = bloch(0.0, std::sqrt(1.0 - m * m) * 0.5, m);
    EXPECT_LT((effective_hamiltonian(zz, d.op()).matrix() - m * pauli::z()).norm(), 1e-15);
  }
  const auto d = bloch(0.2, -0.3, 0.4);
  EXPECT_LT((effective_hamiltonian(builtin_potential("identity"), d.op()).matrix() - Matrix::Identity(2, 2)).norm(),
            1e-15);
  EXPECT_LT(effective_hamiltonian(zz, plus_state().op()).matrix().norm(), 1e-15);
  EXPECT_THROW(effective_hamiltonian(zz, Operator::identity(SiteSpace(2, 2))), DimensionError);
}

TEST(effective_hamiltonian, matches_index_sums) {
  std::mt19937_64 rng(101);
  for (int d : {2, 3}) {
    const TwoBodyPotential v(Operator(SiteSpace(d, 2), oracle::random_pair_potential(d, rng)));
    const Matrix rho = oracle::random_density(d, rng);
    EXPECT_LT((effective_hamiltonian(v, Operator::single_site(rho)).matrix() - effective_by_loops(v.op().matrix(), rho))
                  .norm(),
              1e-13);
  }
}

TEST(hartree_rhs, stationary_cases) {
  EXPECT_LT(hartree_rhs(builtin_potential("zero"), bloch(0.3, 0.1, 0.2).op()).matrix().norm(), 1e-15);
  EXPECT_LT(hartree_rhs(builtin_potential("zz"), bloch(0.0, 0.0, 0.4).op()).matrix().norm(), 1e-15);
  EXPECT_LT(hartree_rhs(builtin_potential("zz"), plus_state().op()).matrix().norm(), 1e-15);
}

TEST(hartree_rhs, commutator_and_direct_forms_agree) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = trial % 3 == 0 ? 3 : 2;
    const TwoBodyPotential v(Operator(SiteSpace(d, 2), oracle::random_pair_potential(d, rng)));
    const Operator rho = Operator::single_site(oracle::random_density(d, rng));
    const double hbar = 0.5 + trial * 0.1;
    EXPECT_LT((hartree_rhs(v, rho, hbar).matrix() - hartree_rhs_direct(v, rho, hbar).matrix()).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(hartree_evolve, trivial_and_stationary) {
  const auto v = builtin_potential("xx+zz");
  const auto d0 = bloch(0.1, 0.5, -0.2);
  EXPECT_LT(max_error(hartree_evolve(v, d0, 0.0).density, d0.matrix()), 1e-15);
  const auto stat = hartree_evolve(builtin_potential("zz"), plus_state(), 2.0);
  EXPECT_LT(max_error(stat.density, plus_state().matrix()), 1e-14);
  EXPECT_DOUBLE_EQ(stat.t, 2.0);
}

TEST(hartree_evolve, zz_precession_closed_form) {
  // Tr(σz D) is conserved under V = σz⊗σz, so D(t) = e^{-i m σz t/ħ} D0 e^{i m σz t/ħ}.
  const auto zz = builtin_potential("zz");
  for (double hbar : {1.0, 0.5}) {
    const auto d0 = bloch(0.6, 0.0, 0.7);
    const double t = 1.5;
    const Matrix u = oracle::expm_unitary(0.7 * oracle::pauli_z(), t / hbar);
    const auto out = hartree_evolve(zz, d0, t, IntegratorConfig{1e-3}, hbar);
    EXPECT_LT(max_error(out.density, u * d0.matrix() * u.adjoint()), 1e-11) << hbar;
  }
}

TEST(hartree_evolve, spectrum_preserved) {
  const auto v = builtin_potential("xz+zx");
  const auto trajectory = hartree_trajectory(v, pure_state_projector(Vector::Unit(2, 0)), 2.0, {}, 1.0, 50);
  for (const auto& state : trajectory) {
    const auto ev = eigenvalues(state.density.op());
    EXPECT_NEAR(ev.minCoeff(), 0.0, 1e-8);
    EXPECT_NEAR(ev.maxCoeff(), 1.0, 1e-8);
  }
}

TEST(hartree_evolve, fourth_order_convergence) {
  // A non-stationary point: (1,1,1)/√3 precesses under V_D = (r_x σx + r_z σz)/2.
  const auto v = builtin_potential("xx+zz");
  const double c = 1.0 / std::sqrt(3.0);
  const auto d0 = bloch(c, c, c);
  const auto ref = hartree_evolve(v, d0, 2.0, IntegratorConfig{0.0125}).density.matrix();
  const double e1 = max_error(hartree_evolve(v, d0, 2.0, IntegratorConfig{0.2}).density, ref);
  const double e2 = max_error(hartree_evolve(v, d0, 2.0, IntegratorConfig{0.1}).density, ref);
  ASSERT_GT(e2, 0.0);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(hartree_evolve, hbar_rescales_time) {
  const auto v = builtin_potential("xx+zz");
  const auto d0 = bloch(0.3, -0.4, 0.5);
  const auto a = hartree_evolve(v, d0, 1.0, IntegratorConfig{1e-3}, 2.0);
  const auto b = hartree_evolve(v, d0, 0.5, IntegratorConfig{5e-4}, 1.0);
  EXPECT_LT(max_error(a.density, b.density.matrix()), 1e-13);
}

TEST(hartree_evolve, errors) {
  const auto v = builtin_potential("xx+zz");
  EXPECT_THROW(hartree_evolve(v, plus_state(), 1.0, IntegratorConfig{0.3}), DomainError);
  EXPECT_THROW(hartree_evolve(v, plus_state(), -1.0), DomainError);
  EXPECT_THROW(hartree_evolve(v, plus_state(), 1.0, {}, 0.0), DomainError);
  EXPECT_THROW(hartree_evolve(v, tensor(plus_state(), plus_state()), 1.0), DimensionError);
  // far too coarse a step for a strong potential leaves the density set
  const TwoBodyPotential strong(Operator(SiteSpace(2, 2), 40.0 * v.op().matrix()));
  EXPECT_THROW(hartree_evolve(strong, bloch(0.5, 0.5, 0.5), 4.0, IntegratorConfig{0.5}), InvariantError);
}

TEST(hartree_evolve, renormalize_keeps_unit_trace) {
  const auto v = builtin_potential("xx+zz");
  const auto out = hartree_evolve(v, bloch(0.2, 0.7, 0.1), 1.0, IntegratorConfig{0.05, true});
  EXPECT_NEAR(out.density.op().trace().real(), 1.0, 1e-15);
}

TEST(hartree_trajectory, recording_and_csv) {
  const auto v = builtin_potential("xx+zz");
  const auto traj = hartree_trajectory(v, bloch(0.2, 0.7, 0.1), 1.0, IntegratorConfig{0.1}, 1.0, 3);
  // t = 0, 0.3, 0.6, 0.9, 1.0
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_DOUBLE_EQ(traj.back().t, 1.0);
  EXPECT_NEAR(traj[1].t, 0.3, 1e-15);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "t,re_0_0,im_0_0,re_0_1,im_0_1,re_1_0,im_1_0,re_1_1,im_1_1,min_eig,trace_dev");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  EXPECT_EQ(rows, 5);
}

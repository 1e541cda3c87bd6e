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

#include <cmath>
#include <ostream>
#include <sstream>

#include "qchaos/errors.hpp"
#include "qchaos/format.hpp"

namespace qchaos {

namespace {

void require_single_site(const TwoBodyPotential& v, const Operator& d, const char* what) {
  if (d.space().n() != 1 || d.space().d() != v.d()) {
    throw DimensionError(std::string(what) + ": potential on (C^" + std::to_string(v.d()) +
                         ")^2 needs a single-site operator, got " + to_string(d.space()));
  }
}

}  // namespace

Operator effective_hamiltonian(const TwoBodyPotential& v, const Operator& d) {
  require_single_site(v, d, "effective_hamiltonian");
  const Operator id = Operator::identity(d.space());
  return Operator(d.space(), partial_trace(v.op() * tensor(id, d), 1).matrix());
}

Operator hartree_rhs(const TwoBodyPotential& v, const Operator& d, double hbar) {
  const Matrix vd = effective_hamiltonian(v, d).matrix();
  const Matrix comm = vd * d.matrix() - d.matrix() * vd;
  return Operator(d.space(), Complex(0.0, -1.0 / hbar) * comm);
}

Operator hartree_rhs_direct(const TwoBodyPotential& v, const Operator& d, double hbar) {
  require_single_site(v, d, "hartree_rhs_direct");
  const Operator dd = tensor(d, d);
  const Operator comm = v.op() * dd - dd * v.op();
  return Operator(d.space(), Complex(0.0, -1.0 / hbar) * partial_trace(comm, 1).matrix());
}

namespace {

long step_count(double t, double dt) {
  if (!(dt > 0.0)) throw DomainError("integrator dt must be positive");
  if (!(t >= 0.0)) throw DomainError("hartree_evolve needs t >= 0");
  const double ratio = t / dt;
  const long steps = std::lround(ratio);
  if (std::abs(static_cast<double>(steps) * dt - t) > 1e-9 * std::max(1.0, t)) {
    std::ostringstream os;
    os << "dt=" << dt << " does not divide t=" << t;
    throw DomainError(os.str());
  }
  return steps;
}

Matrix rk4_step(const TwoBodyPotential& v, const SiteSpace& space, const Matrix& d, double dt, double hbar) {
  auto f = [&](const Matrix& x) { return hartree_rhs(v, Operator(space, x), hbar).matrix(); };
  const Matrix k1 = f(d);
  const Matrix k2 = f(d + 0.5 * dt * k1);
  const Matrix k3 = f(d + 0.5 * dt * k2);
  const Matrix k4 = f(d + dt * k3);
  return d + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

HartreeState accept(const SiteSpace& space, const Matrix& d, double t) {
  Operator op(space, d);
  const auto diag = diagnose_density(op);
  if (!diag.within(kHartreeFailureTol)) {
    std::ostringstream os;
    os << "Hartree state left the density set at t=" << t << " (hermitian_dev=" << diag.hermitian_deviation
       << " min_eig=" << diag.min_eigenvalue << " trace_dev=" << diag.trace_deviation << "); reduce dt";
    throw InvariantError(os.str());
  }
  return HartreeState{DensityOperator(std::move(op), kHartreeStateTol), t};
}

}  // namespace

std::vector<HartreeState> hartree_trajectory(const TwoBodyPotential& v, const DensityOperator& d0, double t,
                                             const IntegratorConfig& cfg, double hbar, int record_every) {
  require_single_site(v, d0.op(), "hartree_evolve");
  if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
  if (record_every < 1) throw DomainError("record_every must be >= 1");
  const long steps = step_count(t, cfg.dt);
  const SiteSpace& space = d0.space();

  std::vector<HartreeState> out;
  out.push_back(HartreeState{DensityOperator(d0.op(), kHartreeStateTol), 0.0});
  Matrix d = d0.matrix();
  for (long s = 1; s <= steps; ++s) {
    d = rk4_step(v, space, d, cfg.dt, hbar);
    if (cfg.renormalize) d /= d.trace();
    const double now = (s == steps) ? t : static_cast<double>(s) * cfg.dt;
    HartreeState state = accept(space, d, now);
    if (s % record_every == 0 || s == steps) out.push_back(std::move(state));
  }
  return out;
}

HartreeState hartree_evolve(const TwoBodyPotential& v, const DensityOperator& d0, double t,
                            const IntegratorConfig& cfg, double hbar) {
  const long steps = step_count(t, cfg.dt);
  auto trajectory = hartree_trajectory(v, d0, t, cfg, hbar, static_cast<int>(std::max(steps, 1L)));
  return std::move(trajectory.back());
}

void write_trajectory_csv(std::ostream& os, const std::vector<HartreeState>& trajectory) {
  if (trajectory.empty()) return;
  const auto dim = static_cast<Eigen::Index>(trajectory.front().density.dim());
  os << "t";
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) os << ",re_" << r << '_' << c << ",im_" << r << '_' << c;
  }
  os << ",min_eig,trace_dev\n";
  for (const auto& state : trajectory) {
    const auto diag = diagnose_density(state.density.op());
    os << format_double(state.t);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        const Complex z = state.density.matrix()(r, c);
        os << ',' << format_double(z.real()) << ',' << format_double(z.imag());
      }
    }
    os << ',' << format_double(diag.min_eigenvalue) << ',' << format_double(diag.trace_deviation) << '\n';
  }
}

}  // namespace qchaos

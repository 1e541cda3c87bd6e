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

#include "qchaos/chaos_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "qchaos/errors.hpp"
#include "qchaos/format.hpp"

namespace qchaos {

DiscreteMeasure::DiscreteMeasure(int j_size, int n, std::vector<double> weights, double tol)
    : j_size_(j_size), n_(n), tol_(tol), weights_(std::move(weights)) {
  if (j_size < 1 || n < 1) throw DomainError("discrete measure needs J_size >= 1 and n >= 1");
  const std::size_t expected = guarded_power(static_cast<std::size_t>(j_size), n, kMaxMeasureSize);
  if (weights_.size() != expected) {
    throw DimensionError("measure on J^n with J_size=" + std::to_string(j_size) + ", n=" + std::to_string(n) +
                         " needs " + std::to_string(expected) + " weights, got " +
                         std::to_string(weights_.size()));
  }
  double sum = 0.0;
  for (double& w : weights_) {
    if (!std::isfinite(w) || w < -tol) {
      throw InvariantError("measure weight " + format_double(w) + " is negative beyond tolerance");
    }
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw InvariantError("measure weights sum to " + format_double(sum) + ", not 1");
  }
}

DiscreteMeasure DiscreteMeasure::point_mass(int j_size, const std::vector<int>& atom) {
  const int n = static_cast<int>(atom.size());
  if (j_size < 1 || n < 1) throw DomainError("point mass needs J_size >= 1 and a nonempty atom");
  std::vector<double> w(guarded_power(static_cast<std::size_t>(j_size), n, kMaxMeasureSize), 0.0);
  std::size_t index = 0;
  for (int j : atom) {
    if (j < 0 || j >= j_size) throw DomainError("atom coordinate " + std::to_string(j) + " outside J");
    index = index * static_cast<std::size_t>(j_size) + static_cast<std::size_t>(j);
  }
  w[index] = 1.0;
  return DiscreteMeasure(j_size, n, std::move(w));
}

DiscreteMeasure DiscreteMeasure::uniform(int j_size, int n) {
  const std::size_t size = guarded_power(static_cast<std::size_t>(std::max(j_size, 1)), std::max(n, 1), kMaxMeasureSize);
  return DiscreteMeasure(j_size, n, std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

std::vector<int> DiscreteMeasure::atom(std::size_t index) const {
  std::vector<int> out(static_cast<std::size_t>(n_));
  for (int s = n_ - 1; s >= 0; --s) {
    out[static_cast<std::size_t>(s)] = static_cast<int>(index % static_cast<std::size_t>(j_size_));
    index /= static_cast<std::size_t>(j_size_);
  }
  return out;
}

std::size_t DiscreteMeasure::index_of(const std::vector<int>& atom) const {
  if (static_cast<int>(atom.size()) != n_) throw DimensionError("atom has the wrong number of coordinates");
  std::size_t index = 0;
  for (int j : atom) {
    if (j < 0 || j >= j_size_) throw DomainError("atom coordinate " + std::to_string(j) + " outside J");
    index = index * static_cast<std::size_t>(j_size_) + static_cast<std::size_t>(j);
  }
  return index;
}

DiscreteMeasure product(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.j_size() != b.j_size()) throw DimensionError("product of measures on different alphabets");
  std::vector<double> w;
  w.reserve(a.size() * b.size());
  for (double x : a.weights()) {
    for (double y : b.weights()) w.push_back(x * y);
  }
  return DiscreteMeasure(a.j_size(), a.n() + b.n(), std::move(w), std::max(a.tol(), b.tol()));
}

DiscreteMeasure measure_power(const DiscreteMeasure& p, int n) {
  if (n < 1) throw DomainError("measure_power needs n >= 1");
  guarded_power(p.size(), n, kMaxMeasureSize);
  DiscreteMeasure out = p;
  for (int i = 1; i < n; ++i) out = product(out, p);
  return out;
}

DiscreteMeasure symmetrize(const DiscreteMeasure& p) {
  const int n = p.n();
  if (n > 8) throw DomainError("symmetrize enumerates n! permutations; n must be <= 8");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> acc(p.size(), 0.0);
  double count = 0.0;
  do {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto atom = p.atom(i);
      std::vector<int> moved(atom.size());
      for (std::size_t s = 0; s < atom.size(); ++s) moved[s] = atom[static_cast<std::size_t>(perm[s])];
      acc[p.index_of(moved)] += p[i];
    }
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& w : acc) w /= count;
  return DiscreteMeasure(p.j_size(), n, std::move(acc), p.tol());
}

DiscreteMeasure classical_marginal(const DiscreteMeasure& p, int k) {
  if (k < 1 || k > p.n()) {
    throw DomainError("classical_marginal: k=" + std::to_string(k) + " outside 1.." + std::to_string(p.n()));
  }
  if (k == p.n()) return p;
  const std::size_t rest = guarded_power(static_cast<std::size_t>(p.j_size()), p.n() - k, kMaxMeasureSize);
  std::vector<double> w(p.size() / rest, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) w[i / rest] += p[i];
  return DiscreteMeasure(p.j_size(), k, std::move(w), p.tol());
}

bool is_symmetric_measure(const DiscreteMeasure& p, double tol) {
  for (int s = 0; s + 1 < p.n(); ++s) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto atom = p.atom(i);
      std::swap(atom[static_cast<std::size_t>(s)], atom[static_cast<std::size_t>(s + 1)]);
      if (std::abs(p[i] - p[p.index_of(atom)]) > tol) return false;
    }
  }
  return true;
}

double total_variation(const DiscreteMeasure& p, const DiscreteMeasure& q) {
  if (p.j_size() != q.j_size() || p.n() != q.n()) {
    throw DimensionError("total_variation: measures have different shapes");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

std::string_view to_string(NormTag tag) { return tag == NormTag::trace ? "trace" : "tv"; }

namespace {

void require_increasing(int previous, int n) {
  if (n <= previous) throw DomainError("profile family must list strictly increasing n");
}

}  // namespace

ChaosProfile chaos_profile_quantum(const QuantumFamily& family, const DensityOperator& limit, int k) {
  if (limit.space().n() != 1) throw DimensionError("limit density must be single-site");
  if (k < 1) throw DomainError("marginal order k must be >= 1");
  ChaosProfile profile{k, NormTag::trace, {}, {}};
  const Operator target = tensor_power(limit.op(), k);
  int previous = 0;
  for (const auto& [n, d] : family) {
    require_increasing(previous, n);
    previous = n;
    if (d.space().n() != n || d.space().d() != limit.space().d()) {
      throw DimensionError("family member n=" + std::to_string(n) + " lives on " + to_string(d.space()));
    }
    if (k > n) throw DomainError("k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    if (symmetry_class(d, kDensityTol) == SymmetryClass::none) {
      profile.warnings.push_back("density at n=" + std::to_string(n) + " is not permutation symmetric");
    }
    const Operator marginal = partial_trace(d.op(), k);
    profile.points.push_back({n, trace_norm(marginal.matrix() - target.matrix())});
  }
  return profile;
}

ChaosProfile chaos_profile_classical(const ClassicalFamily& family, const DiscreteMeasure& limit, int k) {
  if (limit.n() != 1) throw DimensionError("limit law must be a one-coordinate measure");
  if (k < 1) throw DomainError("marginal order k must be >= 1");
  ChaosProfile profile{k, NormTag::tv, {}, {}};
  const DiscreteMeasure target = measure_power(limit, k);
  int previous = 0;
  for (const auto& [n, p] : family) {
    require_increasing(previous, n);
    previous = n;
    if (p.n() != n || p.j_size() != limit.j_size()) {
      throw DimensionError("family member n=" + std::to_string(n) + " has the wrong shape");
    }
    if (k > n) throw DomainError("k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    if (!is_symmetric_measure(p, 1e-9)) {
      profile.warnings.push_back("measure at n=" + std::to_string(n) + " is not symmetric");
    }
    profile.points.push_back({n, total_variation(classical_marginal(p, k), target)});
  }
  return profile;
}

std::optional<double> scaling_exponent(const ChaosProfile& profile) {
  if (profile.points.size() < 3) throw DomainError("scaling_exponent needs at least three points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : profile.points) {
    if (!(pt.distance > 0.0)) return std::nullopt;
    const double x = std::log(static_cast<double>(pt.n));
    const double y = std::log(pt.distance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(profile.points.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_profile_csv(std::ostream& os, const ChaosProfile& profile, std::string_view scenario_id,
                       const std::vector<std::pair<std::string, std::string>>& extra_meta) {
  os << "# k=" << profile.k << '\n';
  os << "# norm=" << to_string(profile.norm) << '\n';
  os << "# scenario=" << scenario_id << '\n';
  for (const auto& [key, value] : extra_meta) os << "# " << key << '=' << value << '\n';
  os << "n,distance\n";
  for (const auto& pt : profile.points) os << pt.n << ',' << format_double(pt.distance) << '\n';
}

}  // namespace qchaos

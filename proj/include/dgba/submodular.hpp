// Copyright 2026 The DGBA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Set-function side of the library: the utility oracle interface, marginal
// gains, exhaustive elemental curvature, the xi(m) factor and approximation
// bound certificates.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "dgba/common.hpp"

namespace dgba {

/// Absolute tolerance for identities that hold exactly in real arithmetic.
inline constexpr double kExactTol = 1e-12;
/// Absolute tolerance for results of iterated floating-point products.
inline constexpr double kIteratedTol = 1e-9;

/// A normalized utility O(P) = sum_j O_j(P) over the ground set I x J.
///
/// Implementations must be reentrant: every method is const and may be
/// called concurrently.
class UtilityOracle {
 public:
  virtual ~UtilityOracle() = default;

  virtual int n_agents() const = 0;
  virtual int n_targets() const = 0;

  /// O_j(P).
  virtual double evaluate_target(int target, const AllocationPolicy& policy) const = 0;

  /// O(P).
  virtual double evaluate(const AllocationPolicy& policy) const {
    double total = 0.0;
    for (int j = 0; j < n_targets(); ++j) total += evaluate_target(j, policy);
    return total;
  }

  /// delta_{(agent, j)}(P) for every target j. Entries for elements already
  /// in P are 0. Oracles with cheap incremental structure override this.
  virtual std::vector<double> marginal_gains(const AllocationPolicy& policy, int agent) const {
    std::vector<double> gains(static_cast<std::size_t>(n_targets()), 0.0);
    for (int j = 0; j < n_targets(); ++j) {
      const GroundElement e{agent, j};
      if (policy.contains(e)) continue;
      gains[j] = evaluate_target(j, policy.with(e)) - evaluate_target(j, policy);
    }
    return gains;
  }
};

/// O(P) = sum of per-element weights.
class AdditiveOracle final : public UtilityOracle {
 public:
  /// weights[i][j] >= 0 is the value of element (i, j).
  explicit AdditiveOracle(std::vector<std::vector<double>> weights)
      : weights_(std::move(weights)) {
    n_targets_ = weights_.empty() ? 0 : static_cast<int>(weights_.front().size());
    for (const auto& row : weights_) {
      if (static_cast<int>(row.size()) != n_targets_)
        throw ConfigurationError("AdditiveOracle: ragged weight matrix");
      for (double w : row)
        if (!(w >= 0.0)) throw DomainError("AdditiveOracle: weights must be >= 0");
    }
  }

  int n_agents() const override { return static_cast<int>(weights_.size()); }
  int n_targets() const override { return n_targets_; }

  double evaluate_target(int target, const AllocationPolicy& policy) const override {
    double total = 0.0;
    for (const auto& e : policy)
      if (e.target == target) total += weights_[e.agent][e.target];
    return total;
  }

 private:
  std::vector<std::vector<double>> weights_;
  int n_targets_ = 0;
};

/// Wraps a per-target callable; handy for ad-hoc objectives in tests and tools.
class FunctionOracle final : public UtilityOracle {
 public:
  using TargetFn = std::function<double(int, const AllocationPolicy&)>;

  FunctionOracle(int n_agents, int n_targets, TargetFn fn)
      : n_agents_(n_agents), n_targets_(n_targets), fn_(std::move(fn)) {}

  int n_agents() const override { return n_agents_; }
  int n_targets() const override { return n_targets_; }
  double evaluate_target(int target, const AllocationPolicy& policy) const override {
    return fn_(target, policy);
  }

 private:
  int n_agents_;
  int n_targets_;
  TargetFn fn_;
};

// ---------------------------------------------------------------------------
// Marginal gain

/// delta_e(P) = O_j(P + e) - O_j(P), j = e.target. Clamped at 0 so that
/// round-off never reports a negative gain for a monotone oracle.
inline double marginal_gain(const UtilityOracle& oracle, const AllocationPolicy& policy,
                            const GroundElement& element) {
  if (policy.contains(element)) {
    std::ostringstream os;
    os << "marginal_gain: element " << element << " already in policy";
    throw ContractViolation(os.str());
  }
  check_bounds(AllocationPolicy{element}, oracle.n_agents(), oracle.n_targets());
  const double gain = oracle.evaluate_target(element.target, policy.with(element)) -
                      oracle.evaluate_target(element.target, policy);
  return std::max(gain, 0.0);
}

// ---------------------------------------------------------------------------
// Elemental curvature

struct CurvatureWitness {
  AllocationPolicy base;
  GroundElement element;
  GroundElement other;
};

struct CurvatureReport {
  double kappa_e = 0.0;
  CurvatureWitness argmax_witness;
  std::uint64_t skipped_pairs = 0;
  std::uint64_t evaluated_pairs = 0;
};

inline constexpr std::size_t kDefaultCurvatureCap = 12;

/// Exhaustive elemental curvature
///
///   kappa_e = max_{P, e != e' not in P} delta_e(P + e') / delta_e(P)
///
/// over every P subset of `ground`. Pairs with delta_e(P) < epsilon are
/// skipped and counted. The scan stops early once the ratio reaches 1, the
/// largest value the clamp allows.
inline CurvatureReport estimate_elemental_curvature(const UtilityOracle& oracle,
                                                    const std::vector<GroundElement>& ground,
                                                    double epsilon,
                                                    std::size_t cap = kDefaultCurvatureCap) {
  if (!(epsilon > 0.0)) throw DomainError("estimate_elemental_curvature: epsilon must be > 0");
  if (ground.size() > cap || ground.size() > 24) {
    std::ostringstream os;
    os << "estimate_elemental_curvature: " << ground.size() << " ground elements exceed cap "
       << cap;
    throw SizeError(os.str());
  }
  {
    AllocationPolicy as_set(ground.begin(), ground.end());
    if (as_set.size() != ground.size())
      throw ContractViolation("estimate_elemental_curvature: duplicate ground elements");
    check_bounds(as_set, oracle.n_agents(), oracle.n_targets());
  }

  const std::size_t n = ground.size();
  const std::uint64_t n_masks = std::uint64_t{1} << n;
  // Value table over every subset; all ratios below are table lookups.
  std::vector<double> value(n_masks);
  for (std::uint64_t mask = 0; mask < n_masks; ++mask)
    value[mask] = oracle.evaluate(policy_from_mask(ground, mask));

  CurvatureReport report;
  double best = -1.0;
  std::uint64_t best_mask = 0;
  std::size_t best_e = 0, best_o = 0;
  for (std::uint64_t mask = 0; mask < n_masks && best < 1.0; ++mask) {
    for (std::size_t e = 0; e < n; ++e) {
      const std::uint64_t be = std::uint64_t{1} << e;
      if (mask & be) continue;
      const double denom = value[mask | be] - value[mask];
      for (std::size_t o = 0; o < n; ++o) {
        const std::uint64_t bo = std::uint64_t{1} << o;
        if (o == e || (mask & bo)) continue;
        if (denom < epsilon) {
          ++report.skipped_pairs;
          continue;
        }
        ++report.evaluated_pairs;
        const double numer = value[mask | bo | be] - value[mask | bo];
        const double ratio = numer / denom;
        if (ratio > best) {
          best = ratio;
          best_mask = mask;
          best_e = e;
          best_o = o;
        }
      }
    }
  }
  if (report.evaluated_pairs == 0)
    throw DegenerateOracleError(
        "estimate_elemental_curvature: every pair had a near-zero denominator");
  report.kappa_e = std::clamp(best, 0.0, 1.0);
  report.argmax_witness = {policy_from_mask(ground, best_mask), ground[best_e], ground[best_o]};
  return report;
}

// ---------------------------------------------------------------------------
// xi(m)

/// xi(m) = (1 - kappa^m) / (m (1 - kappa)), and 1 at kappa = 1. Near kappa = 1
/// the closed form is replaced by the equivalent mean of the geometric series.
inline double xi_factor(long long m, double kappa_e) {
  if (m < 1) throw DomainError("xi_factor: m must be >= 1");
  if (!(kappa_e >= 0.0 && kappa_e <= 1.0)) throw DomainError("xi_factor: kappa_e outside [0,1]");
  if (kappa_e == 1.0) return 1.0;
  if (std::abs(1.0 - kappa_e) < 1e-9) {
    // sum_{k<m} kappa^k / m
    double term = 1.0, sum = 0.0;
    for (long long k = 0; k < m; ++k) {
      sum += term;
      term *= kappa_e;
    }
    return sum / static_cast<double>(m);
  }
  return (1.0 - std::pow(kappa_e, static_cast<double>(m))) /
         (static_cast<double>(m) * (1.0 - kappa_e));
}

// ---------------------------------------------------------------------------
// Bound certificates

struct BoundCertificate {
  double ratio = 1.0;
  double half_threshold = 0.5;
  double curvature_threshold = 0.5;
  double q_threshold = 0.5;
  long long xi_argument = 1;
  bool meets_half = true;
  bool meets_curvature = true;
  bool meets_q = true;

  bool all() const { return meets_half && meets_curvature && meets_q; }
};

/// Smallest positive integer >= (1 - 1/q) N.
inline long long xi_argument_for(double q, int n_agents) {
  if (!(q > 0.0)) throw DomainError("xi_argument_for: q must be > 0");
  const double raw = (1.0 - 1.0 / q) * static_cast<double>(n_agents);
  // Guard against 2.0000000000000004-style ceilings.
  const long long m = static_cast<long long>(std::ceil(raw - 1e-12));
  return std::max<long long>(1, m);
}

/// Compares an achieved utility against the optimum and the three lower
/// bounds 1/2, 1/(1+kappa_e) and 1/(1+kappa_e*xi(ceil((1-1/q)N))).
inline BoundCertificate bound_certificate(double achieved, double optimal, double kappa_e,
                                          double q, int n_agents) {
  if (!(achieved >= 0.0)) throw ContractViolation("bound_certificate: achieved must be >= 0");
  if (!(optimal >= 0.0)) throw ContractViolation("bound_certificate: optimal must be >= 0");
  if (n_agents < 1) throw ContractViolation("bound_certificate: n_agents must be >= 1");
  if (optimal == 0.0 && achieved > 0.0)
    throw InconsistencyError("bound_certificate: positive utility above a zero optimum");
  if (achieved > optimal * (1.0 + kIteratedTol) + kExactTol) {
    std::ostringstream os;
    os.precision(17);
    os << "bound_certificate: achieved " << achieved << " exceeds optimum " << optimal;
    throw InconsistencyError(os.str());
  }

  BoundCertificate c;
  c.ratio = optimal == 0.0 ? 1.0 : achieved / optimal;
  c.xi_argument = xi_argument_for(q, n_agents);
  c.half_threshold = 0.5;
  c.curvature_threshold = 1.0 / (1.0 + kappa_e);
  c.q_threshold = 1.0 / (1.0 + kappa_e * xi_factor(c.xi_argument, kappa_e));
  c.meets_half = c.ratio >= c.half_threshold - kIteratedTol;
  c.meets_curvature = c.ratio >= c.curvature_threshold - kIteratedTol;
  c.meets_q = c.ratio >= c.q_threshold - kIteratedTol;
  return c;
}

}  // namespace dgba

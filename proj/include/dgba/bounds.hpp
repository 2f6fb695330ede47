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

// Executable guarantees: randomized approximation-ratio suites against the
// exhaustive optimum, and structural checks on protocol traces.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "dgba/baselines.hpp"
#include "dgba/dgba.hpp"
#include "dgba/independence.hpp"
#include "dgba/satellite.hpp"
#include "dgba/submodular.hpp"

namespace dgba {

// ---------------------------------------------------------------------------
// Trace checks

struct TraceReport {
  bool disjoint = true;
  bool union_matches = true;
  bool monotone = true;
  double max_increment_error = 0.0;
  int first_bad_round = -1;

  bool ok(double tol = kIteratedTol) const {
    return disjoint && union_matches && max_increment_error <= tol;
  }
};

/// Decision sets are pairwise disjoint, their union is the set of agents
/// that ever committed to a target, and each round's committed-utility
/// increment equals the summed gains of that round's decisions.
inline TraceReport check_trace(const std::vector<RoundRecord>& trace) {
  TraceReport rep;
  std::set<int> seen;
  double prev = 0.0;
  for (const auto& rec : trace) {
    for (int i : rec.decided) {
      if (!seen.insert(i).second && rep.disjoint) {
        rep.disjoint = false;
        if (rep.first_bad_round < 0) rep.first_bad_round = rec.round;
      }
    }
    const double err = std::abs(rec.increment - rec.increment_terms);
    if (err > rep.max_increment_error) {
      rep.max_increment_error = err;
      if (err > kIteratedTol && rep.first_bad_round < 0) rep.first_bad_round = rec.round;
    }
    if (rec.committed_utility < prev - kExactTol) rep.monotone = false;
    prev = rec.committed_utility;
  }
  if (!trace.empty()) {
    std::set<int> committed_agents;
    for (const auto& e : trace.back().committed) committed_agents.insert(e.agent);
    rep.union_matches = committed_agents == seen;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Randomized bound suite

struct BoundSuiteConfig {
  int instances = 100;
  int max_agents = 4;
  int max_targets = 4;
  std::uint64_t seed = 20260101;
  std::size_t curvature_cap = 16;
  double curvature_epsilon = 1e-12;
  /// E_i = U(lo, hi) x median of agent i's pair costs.
  double budget_scale_lo = 0.6;
  double budget_scale_hi = 1.5;
  ScenarioConfig scenario;
};

struct BoundInstance {
  std::uint64_t seed = 0;
  int n_agents = 0;
  int n_targets = 0;
  std::shared_ptr<const ObservationOracle> oracle;
  std::shared_ptr<const ConstraintIntersection> constraints;
  CostTable costs;
  std::vector<double> budgets;
};

/// Static instance: positions and parameters from the scenario generator,
/// pair costs at t = 0, partition plus active budgets.
inline BoundInstance make_bound_instance(const BoundSuiteConfig& cfg, int index) {
  BoundInstance inst;
  inst.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(inst.seed);
  inst.n_agents = std::uniform_int_distribution<int>(1, cfg.max_agents)(rng);
  inst.n_targets = std::uniform_int_distribution<int>(1, cfg.max_targets)(rng);

  ScenarioConfig sc = cfg.scenario;
  sc.n_agents = inst.n_agents;
  sc.n_targets = inst.n_targets;
  sc.budgets.assign(static_cast<std::size_t>(inst.n_agents), 0.0);  // replaced below
  const Scenario s = generate_scenario(sc, rng());

  inst.oracle = std::make_shared<ObservationOracle>(s.agents, s.targets);
  inst.costs = initial_pair_costs(s);
  std::uniform_real_distribution<double> scale(cfg.budget_scale_lo, cfg.budget_scale_hi);
  for (int i = 0; i < inst.n_agents; ++i) {
    std::vector<double> row;
    for (int j = 0; j < inst.n_targets; ++j) {
      inst.costs(i, j) = std::max(inst.costs(i, j), 1e-9);
      row.push_back(inst.costs(i, j));
    }
    inst.budgets.push_back(scale(rng) * median(row));
  }
  auto c = std::make_shared<ConstraintIntersection>(inst.n_agents, inst.n_targets);
  c->add(std::make_shared<PartitionConstraint>(inst.n_agents, inst.n_targets));
  c->add(std::make_shared<BudgetConstraint>(inst.budgets, inst.costs));
  inst.constraints = c;
  return inst;
}

struct BoundInstanceResult {
  std::uint64_t seed = 0;
  int n_agents = 0;
  int n_targets = 0;
  double dgba_utility = 0.0;
  double optimal_utility = 0.0;
  double kappa_e = 0.0;
  double q = 2.0;
  BoundCertificate certificate;
  bool curvature_ok = true;  // false when curvature was degenerate
};

struct BoundSuiteReport {
  std::vector<BoundInstanceResult> instances;
  int half_passes = 0;
  int curvature_passes = 0;
  int q_passes = 0;
  double worst_ratio = 1.0;
  double worst_curvature_margin = std::numeric_limits<double>::infinity();
  double worst_q_margin = std::numeric_limits<double>::infinity();
  std::uint64_t worst_seed = 0;
  double seconds = 0.0;

  int total() const { return static_cast<int>(instances.size()); }
  bool all_pass() const {
    return half_passes == total() && curvature_passes == total() && q_passes == total();
  }
};

/// DGBA on a complete graph against the exhaustive optimum, both under the
/// same partition plus budget system.
inline BoundInstanceResult evaluate_bound_instance(const BoundInstance& inst,
                                                   const BoundSuiteConfig& cfg) {
  BoundInstanceResult r;
  r.seed = inst.seed;
  r.n_agents = inst.n_agents;
  r.n_targets = inst.n_targets;
  const DgbaRun run = dgba_run(inst.oracle, inst.constraints, CommGraph::complete(inst.n_agents),
                               0, DgbaOptions{false, false});
  r.dgba_utility = run.result.utility;
  const SolverResult opt = exact_oracle(*inst.oracle, *inst.constraints, inst.n_agents,
                                        inst.n_targets);
  r.optimal_utility = opt.utility;
  try {
    r.kappa_e = estimate_elemental_curvature(*inst.oracle,
                                             full_ground_set(inst.n_agents, inst.n_targets),
                                             cfg.curvature_epsilon, cfg.curvature_cap)
                    .kappa_e;
  } catch (const DegenerateOracleError&) {
    // Only one element: no pair exists, and 0 is the value that makes the
    // curvature bound exactly 1, which greedy attains with one element.
    r.kappa_e = 0.0;
    r.curvature_ok = false;
  }
  r.q = estimate_q(inst.costs).q;
  r.certificate = bound_certificate(r.dgba_utility, r.optimal_utility, r.kappa_e, r.q,
                                    inst.n_agents);
  return r;
}

inline BoundSuiteReport run_bound_suite(const BoundSuiteConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  BoundSuiteReport rep;
  for (int k = 0; k < cfg.instances; ++k) {
    const BoundInstance inst = make_bound_instance(cfg, k);
    const BoundInstanceResult r = evaluate_bound_instance(inst, cfg);
    const BoundCertificate& c = r.certificate;
    rep.half_passes += c.meets_half;
    rep.curvature_passes += c.meets_curvature;
    rep.q_passes += c.meets_q;
    if (rep.instances.empty() || c.ratio < rep.worst_ratio) {
      rep.worst_ratio = c.ratio;
      rep.worst_seed = r.seed;
    }
    rep.worst_curvature_margin = std::min(rep.worst_curvature_margin, c.ratio - c.curvature_threshold);
    rep.worst_q_margin = std::min(rep.worst_q_margin, c.ratio - c.q_threshold);
    rep.instances.push_back(r);
  }
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace dgba

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

// The observation scenario as a World: the oracle and the communication
// graph are rebuilt from the joint state after every step, and each
// assigned agent flies the minimum-effort plan to its target's observation
// circle, then loiters until the observation window closes.

#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "dgba/dgba.hpp"
#include "dgba/satellite.hpp"

namespace dgba {

class SatelliteWorld final : public World {
 public:
  explicit SatelliteWorld(Scenario scenario)
      : scenario_(std::move(scenario)), agents_(scenario_.agents), targets_(scenario_.targets) {
    if (agents_.empty() || targets_.empty())
      throw ConfigurationError("SatelliteWorld: need N >= 1 and M >= 1");
    rebuild();
  }

  int n_agents() const override { return static_cast<int>(agents_.size()); }
  int n_targets() const override { return static_cast<int>(targets_.size()); }
  const UtilityOracle& oracle() const override { return *oracle_; }
  const CommGraph& graph() const override { return graph_; }
  bool exclusive_targets() const override { return scenario_.exclusive_targets; }
  bool dynamic() const override { return true; }
  int horizon() const override { return scenario_.steps; }
  double time() const override { return time_; }
  int step() const { return step_; }

  const Scenario& scenario() const { return scenario_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const std::vector<TargetState>& targets() const { return targets_; }
  const ObservationOracle& observation_oracle() const { return *oracle_; }

  /// Bidding on a target closes once its lock window opens, so every claim
  /// on a target is negotiated before any of them commits.
  bool bidding_open(int target) const {
    const TargetState& t = targets_[target];
    return (t.maneuver_deadline() - time_) / t.obs_duration > 1.0;
  }

  /// Estimated cost of (agent, target) from the current state, or +inf.
  double pair_cost(int agent, int target) const {
    const AgentState& a = agents_[agent];
    const TargetState& t = targets_[target];
    const double horizon = t.maneuver_deadline() - time_;
    if (!(horizon > 0.0)) return std::numeric_limits<double>::infinity();
    const RendezvousPoint rv = rendezvous_point(a, t, time_, scenario_.loiter_accel);
    return analytic_min_effort(a.position, a.velocity, rv.position, rv.velocity, horizon) +
           loiter_cost(t, scenario_.loiter_accel);
  }

  void available_targets(int agent, const AllocationPolicy& allocated,
                         std::vector<char>& out) const override {
    const int m = n_targets();
    out.assign(static_cast<std::size_t>(m), 1);
    for (const auto& e : allocated) {
      if (e.agent == agent) {
        // The agent already holds a target; nothing else may be added.
        std::fill(out.begin(), out.end(), 0);
        return;
      }
      if (scenario_.exclusive_targets) out[e.target] = 0;
    }
    const double budget = remaining_budget(agent);
    for (int j = 0; j < m; ++j) {
      if (!out[j]) continue;
      out[j] = bidding_open(j) && pair_cost(agent, j) <= budget ? 1 : 0;
    }
  }

  bool lock_ready(int, int target) const override {
    if (target == kNoTarget) {
      for (int j = 0; j < n_targets(); ++j)
        if (bidding_open(j)) return false;
      return true;
    }
    return !bidding_open(target);
  }

  bool observation_complete(int, int target) const override {
    return time_ >= targets_[target].end_time;
  }

  double remaining_budget(int agent) const override {
    return std::max(0.0, agents_[agent].fuel - agents_[agent].accrued_cost);
  }

  std::vector<double> accrued_costs() const override {
    std::vector<double> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) out.push_back(a.accrued_cost);
    return out;
  }

  /// Targets assigned per agent (kNoTarget when idle) drive the controls.
  void advance(const std::vector<AgentRuntime>& runtimes) override {
    std::vector<int> assignment(agents_.size(), kNoTarget);
    for (const auto& r : runtimes) assignment[r.id] = r.target();
    advance_with(assignment);
  }

  void advance_with(const std::vector<int>& assignment) {
    const double dt = scenario_.dt;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      AgentState& a = agents_[i];
      const int j = assignment[i];
      AgentState next = j == kNoTarget ? coast(a, dt) : fly(a, targets_[j], dt);
      if (next.accrued_cost > a.fuel) next = coast(a, dt);
      if (!next.position.allFinite() || !next.velocity.allFinite()) {
        std::ostringstream os;
        os << "SatelliteWorld: agent " << i << " state became non-finite at t = " << time_;
        throw NumericalError(os.str());
      }
      a = next;
    }
    for (auto& t : targets_) {
      const detail::TargetVec y = detail::propagate_target(t, dt);
      t.position = y.segment<3>(0);
      t.velocity = y.segment<3>(3);
    }
    ++step_;
    time_ = step_ * dt;
    rebuild();
  }

 private:
  static AgentState coast(const AgentState& a, double h) {
    AgentState out = a;
    out.position += a.velocity * h;
    return out;
  }

  /// Rendezvous leg up to the manoeuvre deadline, loiter leg after it.
  AgentState fly(const AgentState& a, const TargetState& target, double dt) const {
    AgentState cur = a;
    double s = time_;
    const double t_end = time_ + dt;
    const double deadline = target.maneuver_deadline();
    if (s < deadline) {
      const double h = std::min(t_end, deadline) - s;
      const RendezvousPoint rv = rendezvous_point(cur, predict(target, s), s, scenario_.loiter_accel);
      const AffineControl u = rendezvous_plan(cur, rv.position, rv.velocity, s, deadline);
      cur = integrate(cur, u, h);
      s += h;
    }
    if (t_end - s <= 0.0) return cur;
    const double h = t_end - s;
    const TargetState now = predict(target, s);
    if (s >= target.end_time || (cur.position - now.position).norm() > 1.5 * now.obs_radius)
      return coast(cur, h);
    const LoiterCommand cmd = loiter_control(cur, now, scenario_.loiter_accel);
    // The bootstrap impulse only occurs with zero relative velocity, which
    // the rendezvous leg does not produce; it is not charged.
    cur.velocity += cmd.velocity_impulse;
    AffineControl u;
    u.u0 = cmd.acceleration - now.drag_coeff * now.velocity;
    const double h_loiter = std::min(h, target.end_time - s);
    return coast(integrate(cur, u, h_loiter), h - h_loiter);
  }

  /// Target state at absolute time s, propagated from the current step.
  TargetState predict(const TargetState& t, double s) const {
    TargetState out = t;
    const TargetPrediction p = predict_target(t, time_, s);
    out.position = p.position;
    out.velocity = p.velocity;
    return out;
  }

  static AgentState integrate(const AgentState& a, const AffineControl& u, double h) {
    if (h <= 0.0) return a;
    const detail::AgentVec x = detail::propagate_agent(a, u, h);
    AgentState out = a;
    out.position = x.segment<3>(0);
    out.velocity = x.segment<3>(3);
    out.accrued_cost = a.accrued_cost + x[6];
    return out;
  }

  void rebuild() {
    oracle_ = std::make_unique<ObservationOracle>(agents_, targets_);
    graph_ = build_comm_graph(agents_, scenario_.domain_diameter);
  }

  Scenario scenario_;
  std::vector<AgentState> agents_;
  std::vector<TargetState> targets_;
  std::unique_ptr<ObservationOracle> oracle_;
  CommGraph graph_;
  double time_ = 0.0;
  int step_ = 0;
};

/// Frozen t = 0 view of a scenario: the observation oracle at the initial
/// positions, per-pair costs (floored at 1e-9, since budgets need positive
/// costs) and the partition plus budget constraint, optionally with target
/// exclusivity.
struct StaticSnapshot {
  std::shared_ptr<const ObservationOracle> oracle;
  std::shared_ptr<const ConstraintIntersection> constraints;
  CostTable costs;
  std::vector<double> budgets;
};

inline StaticSnapshot static_snapshot(const Scenario& s, bool exclusive) {
  StaticSnapshot out;
  out.oracle = std::make_shared<ObservationOracle>(s.agents, s.targets);
  out.costs = initial_pair_costs(s);
  for (int i = 0; i < s.n_agents(); ++i)
    for (int j = 0; j < s.n_targets(); ++j) out.costs(i, j) = std::max(out.costs(i, j), 1e-9);
  for (const auto& a : s.agents) out.budgets.push_back(a.fuel);
  auto c = std::make_shared<ConstraintIntersection>(s.n_agents(), s.n_targets());
  c->add(std::make_shared<PartitionConstraint>(s.n_agents(), s.n_targets()));
  c->add(std::make_shared<BudgetConstraint>(out.budgets, out.costs));
  if (exclusive) c->add(std::make_shared<TargetExclusiveConstraint>(s.n_agents(), s.n_targets()));
  out.constraints = c;
  return out;
}

}  // namespace dgba

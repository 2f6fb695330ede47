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

// Active-observation scenario: double-integrator satellites, drifting
// targets with linear drag, survival-probability observation utility,
// minimum-effort rendezvous and loiter control, range-limited
// communication graphs and random scenario generation.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "dgba/common.hpp"
#include "dgba/independence.hpp"
#include "dgba/integrator.hpp"
#include "dgba/submodular.hpp"

namespace dgba {

using Vec3 = Eigen::Vector3d;

struct AgentState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double comm_factor = 0.3;   // phi_i; range is phi_i * L
  double fuel = std::numeric_limits<double>::infinity();  // E_i
  double accrued_cost = 0.0;
};

struct TargetState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double info_value = 1.0;    // rho_j
  double decay = 0.8;         // lambda_j
  double end_time = 20.0;     // t_e,j
  double obs_duration = 2.0;  // tau_obs,j
  double obs_radius = 1.0;    // observation circle radius
  double drag_coeff = 0.0;    // k_d

  /// t_f,j = t_e,j - tau_obs,j.
  double maneuver_deadline() const { return end_time - obs_duration; }
};

// ---------------------------------------------------------------------------
// Observation utility

/// exp(-lambda * |p - q|).
inline double survival_probability(const Vec3& agent_pos, const Vec3& target_pos, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("survival_probability: lambda must be > 0");
  return std::exp(-lambda * (agent_pos - target_pos).norm());
}

/// O_j(P) = rho_j [1 - prod_{(i,j) in P} (1 - P_ij)] with P_ij frozen at
/// construction time.
class ObservationOracle final : public UtilityOracle {
 public:
  ObservationOracle(std::vector<std::vector<double>> probability, std::vector<double> info_value)
      : n_agents_(static_cast<int>(probability.size())),
        n_targets_(static_cast<int>(info_value.size())),
        info_value_(std::move(info_value)) {
    prob_.reserve(static_cast<std::size_t>(n_agents_) * n_targets_);
    for (const auto& row : probability) {
      if (static_cast<int>(row.size()) != n_targets_)
        throw ConfigurationError("ObservationOracle: probability matrix is not N x M");
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("ObservationOracle: probability outside [0,1]");
        prob_.push_back(p);
      }
    }
  }

  ObservationOracle(const std::vector<AgentState>& agents, const std::vector<TargetState>& targets)
      : n_agents_(static_cast<int>(agents.size())), n_targets_(static_cast<int>(targets.size())) {
    prob_.resize(static_cast<std::size_t>(n_agents_) * n_targets_);
    info_value_.reserve(targets.size());
    for (const auto& t : targets) info_value_.push_back(t.info_value);
    for (int i = 0; i < n_agents_; ++i)
      for (int j = 0; j < n_targets_; ++j)
        prob_[index(i, j)] =
            survival_probability(agents[i].position, targets[j].position, targets[j].decay);
  }

  int n_agents() const override { return n_agents_; }
  int n_targets() const override { return n_targets_; }
  double probability(int i, int j) const { return prob_[index(i, j)]; }
  double info_value(int j) const { return info_value_[j]; }

  double evaluate_target(int target, const AllocationPolicy& policy) const override {
    double miss = 1.0;
    for (const auto& e : policy)
      if (e.target == target) miss *= 1.0 - prob_[index(e.agent, e.target)];
    return info_value_[target] * (1.0 - miss);
  }

  double evaluate(const AllocationPolicy& policy) const override {
    std::vector<double> miss(static_cast<std::size_t>(n_targets_), 1.0);
    for (const auto& e : policy) miss[e.target] *= 1.0 - prob_[index(e.agent, e.target)];
    double total = 0.0;
    for (int j = 0; j < n_targets_; ++j) total += info_value_[j] * (1.0 - miss[j]);
    return total;
  }

  /// O(|P| + M): one pass for the per-target miss products.
  std::vector<double> marginal_gains(const AllocationPolicy& policy, int agent) const override {
    std::vector<double> miss(static_cast<std::size_t>(n_targets_), 1.0);
    std::vector<char> held(static_cast<std::size_t>(n_targets_), 0);
    for (const auto& e : policy) {
      miss[e.target] *= 1.0 - prob_[index(e.agent, e.target)];
      if (e.agent == agent) held[e.target] = 1;
    }
    std::vector<double> gains(static_cast<std::size_t>(n_targets_), 0.0);
    for (int j = 0; j < n_targets_; ++j)
      if (!held[j]) gains[j] = info_value_[j] * prob_[index(agent, j)] * miss[j];
    return gains;
  }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_targets_ + j; }

  int n_agents_;
  int n_targets_;
  std::vector<double> prob_;
  std::vector<double> info_value_;
};

struct ObservationUtility {
  double total = 0.0;
  std::vector<double> per_target;
};

/// Q(Z) and its per-target terms at the current states.
inline ObservationUtility observation_utility(const AllocationPolicy& policy,
                                              const std::vector<AgentState>& agents,
                                              const std::vector<TargetState>& targets) {
  check_bounds(policy, static_cast<int>(agents.size()), static_cast<int>(targets.size()));
  const ObservationOracle oracle(agents, targets);
  ObservationUtility out;
  out.per_target.resize(targets.size());
  for (int j = 0; j < static_cast<int>(targets.size()); ++j) {
    out.per_target[j] = oracle.evaluate_target(j, policy);
    out.total += out.per_target[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Control laws

inline constexpr double kDeadlineFloor = 1e-6;

/// Minimum-effort rendezvous acceleration
///   u = 4/tau (v_hat - v) + 6/tau^2 (r_hat - p - v_hat tau),  tau = t_f - t,
/// with tau clamped below at `floor`.
inline Vec3 rendezvous_control(const AgentState& agent, const Vec3& rendezvous_point,
                               const Vec3& rendezvous_velocity, double time_now, double deadline,
                               double floor = kDeadlineFloor) {
  const double tau = std::max(deadline - time_now, floor);
  return 4.0 / tau * (rendezvous_velocity - agent.velocity) +
         6.0 / (tau * tau) *
             (rendezvous_point - agent.position - rendezvous_velocity * tau);
}

/// u(s) = u0 + slope (s - t0) over one integration step starting at t0.
struct AffineControl {
  Vec3 u0 = Vec3::Zero();
  Vec3 slope = Vec3::Zero();

  Vec3 at(double elapsed) const { return u0 + slope * elapsed; }
};

/// The open-loop minimum-effort input from the current state: its value at
/// the step start is rendezvous_control, and it is affine in time, so a
/// fixed-step RK4 propagation of the double integrator is exact.
inline AffineControl rendezvous_plan(const AgentState& agent, const Vec3& rendezvous_point,
                                     const Vec3& rendezvous_velocity, double time_now,
                                     double deadline, double floor = kDeadlineFloor) {
  const double tau = std::max(deadline - time_now, floor);
  const Vec3 a = rendezvous_point - agent.position - agent.velocity * tau;
  const Vec3 b = rendezvous_velocity - agent.velocity;
  AffineControl c;
  c.u0 = rendezvous_control(agent, rendezvous_point, rendezvous_velocity, time_now, deadline, floor);
  c.slope = (6.0 * tau * b - 12.0 * a) / (tau * tau * tau);
  return c;
}

struct LoiterCommand {
  Vec3 acceleration = Vec3::Zero();
  /// Velocity change applied once when the relative velocity is zero.
  Vec3 velocity_impulse = Vec3::Zero();
  bool bootstrapped = false;
};

/// Fixed unit vector perpendicular to `n` (z x n, falling back to x x n).
inline Vec3 fixed_perpendicular(const Vec3& n) {
  Vec3 t = Vec3::UnitZ().cross(n);
  if (t.norm() < 1e-9) t = Vec3::UnitX().cross(n);
  return t.normalized();
}

/// Centripetal acceleration |v_rel|^2 / R toward the target centre.
/// `max_accel` sets the bootstrap orbital speed sqrt(max_accel * R).
inline LoiterCommand loiter_control(const AgentState& agent, const TargetState& target,
                                    double max_accel) {
  const Vec3 rel = target.position - agent.position;
  const double dist = rel.norm();
  if (dist > 1.5 * target.obs_radius) {
    std::ostringstream os;
    os << "loiter_control: agent at distance " << dist << " outside 1.5 x radius "
       << target.obs_radius;
    throw ContractViolation(os.str());
  }
  const Vec3 inward = dist > 1e-12 ? Vec3(rel / dist) : Vec3(-Vec3::UnitX());
  LoiterCommand cmd;
  Vec3 v_rel = agent.velocity - target.velocity;
  if (v_rel.norm() < 1e-12) {
    const double speed = std::sqrt(std::max(max_accel, 0.0) * target.obs_radius);
    cmd.velocity_impulse = speed * fixed_perpendicular(inward);
    cmd.bootstrapped = true;
    v_rel += cmd.velocity_impulse;
  }
  cmd.acceleration = v_rel.squaredNorm() / target.obs_radius * inward;
  return cmd;
}

// ---------------------------------------------------------------------------
// Dynamics

struct StepOutput {
  std::vector<AgentState> agents;
  std::vector<TargetState> targets;
  std::vector<double> cost_increments;
  std::vector<char> coasted;  // 1 where the fuel limit forced u = 0
};

namespace detail {

using AgentVec = Eigen::Matrix<double, 7, 1>;  // p, v, accrued cost
using TargetVec = Eigen::Matrix<double, 6, 1>;

inline AgentVec propagate_agent(const AgentState& a, const AffineControl& u, double dt) {
  AgentVec x;
  x << a.position, a.velocity, 0.0;
  return rk4_step(x, 0.0, dt, [&](double s, const AgentVec& y) {
    const Vec3 us = u.at(s);
    AgentVec d;
    d << y.segment<3>(3), us, 0.5 * us.squaredNorm();
    return d;
  });
}

inline TargetVec propagate_target(const TargetState& t, double dt) {
  TargetVec x;
  x << t.position, t.velocity;
  return rk4_step(x, 0.0, dt, [&](double, const TargetVec& y) {
    TargetVec d;
    d << y.segment<3>(3), -t.drag_coeff * y.segment<3>(3);
    return d;
  });
}

inline bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace detail

/// Advances every agent (double integrator, affine control over the step)
/// and every target (linear drag) by dt with one RK4 step. Accrued cost
/// grows by 1/2 int |u|^2 dt; an agent that would overrun its fuel coasts.
inline StepOutput step_dynamics(const std::vector<AgentState>& agents,
                                const std::vector<TargetState>& targets,
                                const std::vector<AffineControl>& controls, double dt) {
  if (!(dt > 0.0)) throw DomainError("step_dynamics: dt must be > 0");
  if (controls.size() != agents.size())
    throw ConfigurationError("step_dynamics: one control per agent required");
  StepOutput out;
  out.agents = agents;
  out.targets = targets;
  out.cost_increments.assign(agents.size(), 0.0);
  out.coasted.assign(agents.size(), 0);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& a = agents[i];
    detail::AgentVec x = detail::propagate_agent(a, controls[i], dt);
    if (a.accrued_cost + x[6] > a.fuel) {
      x = detail::propagate_agent(a, AffineControl{}, dt);
      out.coasted[i] = 1;
    }
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "step_dynamics: agent " << i << " state became non-finite (u0 = "
         << controls[i].u0.transpose() << ", slope = " << controls[i].slope.transpose() << ")";
      throw NumericalError(os.str());
    }
    out.agents[i].position = x.segment<3>(0);
    out.agents[i].velocity = x.segment<3>(3);
    out.cost_increments[i] = x[6];
    out.agents[i].accrued_cost = a.accrued_cost + x[6];
  }
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const detail::TargetVec y = detail::propagate_target(targets[j], dt);
    if (!y.allFinite()) {
      std::ostringstream os;
      os << "step_dynamics: target " << j << " state became non-finite";
      throw NumericalError(os.str());
    }
    out.targets[j].position = y.segment<3>(0);
    out.targets[j].velocity = y.segment<3>(3);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Communication graph

/// Symmetric 0/1 adjacency with zero diagonal.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(int n) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0.0) {}

  static CommGraph complete(int n) {
    CommGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (i != k) g.set(i, k, 1.0);
    return g;
  }

  /// Star centred at `center`.
  static CommGraph star(int n, int center = 0) {
    CommGraph g(n);
    for (int i = 0; i < n; ++i)
      if (i != center) g.connect(i, center);
    return g;
  }

  int size() const { return n_; }
  double operator()(int i, int k) const { return adj_[static_cast<std::size_t>(i) * n_ + k]; }
  void set(int i, int k, double a) { adj_[static_cast<std::size_t>(i) * n_ + k] = a; }
  void connect(int i, int k, double a = 1.0) {
    set(i, k, a);
    set(k, i, a);
  }

  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    for (int k = 0; k < n_; ++k)
      if ((*this)(i, k) > 0.0) out.push_back(k);
    return out;
  }

  /// Undirected edge count.
  long long edge_count() const {
    long long e = 0;
    for (int i = 0; i < n_; ++i)
      for (int k = i + 1; k < n_; ++k)
        if ((*this)(i, k) > 0.0) ++e;
    return e;
  }

  bool is_symmetric() const {
    for (int i = 0; i < n_; ++i) {
      if ((*this)(i, i) != 0.0) return false;
      for (int k = i + 1; k < n_; ++k)
        if ((*this)(i, k) != (*this)(k, i)) return false;
    }
    return true;
  }

  bool is_connected() const {
    if (n_ == 0) return true;
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int k = 0; k < n_; ++k)
        if ((*this)(i, k) > 0.0 && !seen[k]) {
          seen[k] = 1;
          stack.push_back(k);
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  }

  /// Entry-wise OR with another graph on the same vertex set.
  void merge(const CommGraph& other) {
    for (std::size_t k = 0; k < adj_.size(); ++k) adj_[k] = std::max(adj_[k], other.adj_[k]);
  }

  friend bool operator==(const CommGraph&, const CommGraph&) = default;

 private:
  int n_ = 0;
  std::vector<double> adj_;
};

/// a_ik = 1 iff i != k and |p_i - p_k| <= min(phi_i, phi_k) * L.
inline CommGraph build_comm_graph(const std::vector<AgentState>& agents, double domain_diameter) {
  if (!(domain_diameter > 0.0)) throw DomainError("build_comm_graph: L must be > 0");
  const int n = static_cast<int>(agents.size());
  CommGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      const double range = std::min(agents[i].comm_factor, agents[k].comm_factor) * domain_diameter;
      if ((agents[i].position - agents[k].position).norm() <= range) g.connect(i, k);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Rendezvous geometry and pair costs

struct TargetPrediction {
  Vec3 position;
  Vec3 velocity;
};

/// Closed-form drag propagation of a target from `time_now` to `time_future`.
inline TargetPrediction predict_target(const TargetState& target, double time_now,
                                       double time_future) {
  const double dt = time_future - time_now;
  const double k = target.drag_coeff;
  const double decay = std::exp(-k * dt);
  const double travel = k > 1e-12 ? (1.0 - decay) / k : dt;
  return {target.position + target.velocity * travel, target.velocity * decay};
}

struct RendezvousPoint {
  Vec3 position;  // r_hat
  Vec3 velocity;  // v_hat
};

/// Point on the target's observation circle closest to the agent at the
/// predicted deadline state, with the target's velocity plus a tangential
/// orbital speed sqrt(max_accel * R).
inline RendezvousPoint rendezvous_point(const AgentState& agent, const TargetState& target,
                                        double time_now, double max_accel) {
  const double deadline = target.maneuver_deadline();
  const TargetPrediction pred = predict_target(target, time_now, std::max(deadline, time_now));
  Vec3 outward = agent.position - pred.position;
  outward = outward.norm() > 1e-12 ? Vec3(outward.normalized()) : Vec3(Vec3::UnitX());
  const double orbit_speed = std::sqrt(std::max(max_accel, 0.0) * target.obs_radius);
  return {pred.position + target.obs_radius * outward,
          pred.velocity + orbit_speed * fixed_perpendicular(-outward)};
}

struct ManeuverResult {
  double cost = 0.0;
  AgentState final_state;
  int steps = 0;
};

/// Flies one agent alone to (r_hat, v_hat) at `deadline`, replanning at every
/// step, with fixed step dt and a shortened final step that lands exactly
/// on the deadline. Returns 1/2 int |u|^2 dt over the manoeuvre.
inline ManeuverResult simulate_rendezvous(const AgentState& agent, const Vec3& rendezvous_pos,
                                          const Vec3& rendezvous_vel, double time_now,
                                          double deadline, double dt) {
  if (!(dt > 0.0)) throw DomainError("simulate_rendezvous: dt must be > 0");
  ManeuverResult out;
  out.final_state = agent;
  out.final_state.fuel = std::numeric_limits<double>::infinity();
  double t = time_now;
  while (deadline - t > 1e-12 * std::max(1.0, std::abs(deadline))) {
    const double h = std::min(dt, deadline - t);
    const AffineControl u =
        rendezvous_plan(out.final_state, rendezvous_pos, rendezvous_vel, t, deadline);
    const detail::AgentVec x = detail::propagate_agent(out.final_state, u, h);
    if (!x.allFinite()) throw NumericalError("simulate_rendezvous: non-finite state");
    out.final_state.position = x.segment<3>(0);
    out.final_state.velocity = x.segment<3>(3);
    out.cost += x[6];
    t += h;
    ++out.steps;
  }
  out.final_state.accrued_cost = agent.accrued_cost + out.cost;
  out.final_state.fuel = agent.fuel;
  return out;
}

/// Loiter effort 1/2 int |u|^2 over the observation window for a circular
/// orbit driven at `max_accel`.
inline double loiter_cost(const TargetState& target, double max_accel) {
  return 0.5 * max_accel * max_accel * target.obs_duration;
}

/// Estimated cost C_(i,j) from the current state: simulated manoeuvre cost to
/// the rendezvous point plus the loiter cost. nullopt when the manoeuvre
/// deadline has passed.
inline std::optional<double> estimate_pair_cost(const AgentState& agent,
                                                const TargetState& target, double time_now,
                                                double dt, double max_accel) {
  const double deadline = target.maneuver_deadline();
  if (!(deadline > time_now)) return std::nullopt;
  const RendezvousPoint rv = rendezvous_point(agent, target, time_now, max_accel);
  const ManeuverResult m =
      simulate_rendezvous(agent, rv.position, rv.velocity, time_now, deadline, dt);
  return m.cost + loiter_cost(target, max_accel);
}

/// Analytic minimum of 1/2 int |u|^2 for the double integrator moving from
/// (p, v) to (r, w) in time T.
inline double analytic_min_effort(const Vec3& p, const Vec3& v, const Vec3& r, const Vec3& w,
                                  double horizon) {
  const Vec3 a = r - p - v * horizon;
  const Vec3 b = w - v;
  const double T = horizon;
  return 0.5 * (12.0 / (T * T * T) * a.squaredNorm() - 12.0 / (T * T) * a.dot(b) +
                4.0 / T * b.squaredNorm());
}

// ---------------------------------------------------------------------------
// Scenario generation

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ScenarioConfig {
  int n_agents = 5;
  int n_targets = 5;
  double box_size = 10.0;          // positions uniform in [0, box]^3
  std::vector<double> phi{0.3};    // one value for all agents, or one per agent
  double lambda = 0.8;
  double drag_coeff = 0.1;
  double target_speed = 0.2;       // initial target velocity components in +-speed
  Interval end_time{19.0, 20.0};
  Interval obs_duration{2.0, 2.5};
  Interval obs_radius{1.0, 1.15};
  Interval info_value{2.0, 2.5};
  int steps = 2000;                // T; dt = max_j t_e,j / T
  double loiter_accel = 0.1;
  double budget_factor = 10.0;     // E_i = factor * median pair cost
  std::vector<double> budgets;     // explicit E_i, overrides budget_factor
  bool exclusive_targets = true;
  bool reallocate = false;
};

struct Scenario {
  std::vector<AgentState> agents;
  std::vector<TargetState> targets;
  double domain_diameter = 1.0;
  double dt = 0.01;
  int steps = 2000;
  double loiter_accel = 0.1;
  bool exclusive_targets = true;
  bool reallocate = false;
  std::uint64_t seed = 0;

  int n_agents() const { return static_cast<int>(agents.size()); }
  int n_targets() const { return static_cast<int>(targets.size()); }
};

/// SplitMix64 finaliser; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: depends only on the parent and the indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(a + 0x632be59bd9b4e019ULL)) ^
                    splitmix64(b + 0x8cb92ba72f3d8dd7ULL));
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

/// Pair costs for every (agent, target) at time 0; unreachable pairs are +inf.
inline CostTable initial_pair_costs(const Scenario& s) {
  CostTable costs(s.n_agents(), s.n_targets());
  for (int i = 0; i < s.n_agents(); ++i)
    for (int j = 0; j < s.n_targets(); ++j)
      costs(i, j) = estimate_pair_cost(s.agents[i], s.targets[j], 0.0, s.dt, s.loiter_accel)
                        .value_or(std::numeric_limits<double>::infinity());
  return costs;
}

inline Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.n_agents < 1 || cfg.n_targets < 1)
    throw ConfigurationError("scenario: n_agents and n_targets must be >= 1");
  if (!(cfg.box_size > 0.0)) throw ConfigurationError("scenario: box_size must be > 0");
  if (cfg.steps < 1) throw ConfigurationError("scenario: steps must be >= 1");
  if (cfg.phi.empty() ||
      (cfg.phi.size() != 1 && static_cast<int>(cfg.phi.size()) != cfg.n_agents))
    throw ConfigurationError("scenario: phi must have one entry or one per agent");
  if (!cfg.budgets.empty() && static_cast<int>(cfg.budgets.size()) != cfg.n_agents)
    throw ConfigurationError("scenario: budgets must have one entry per agent");
  if (!(cfg.lambda > 0.0)) throw ConfigurationError("scenario: lambda must be > 0");
  if (cfg.obs_radius.lo <= 0.0) throw ConfigurationError("scenario: obs_radius must be > 0");
  if (cfg.end_time.lo - cfg.obs_duration.hi <= 0.0)
    throw ConfigurationError("scenario: end_time must exceed obs_duration");

  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto draw = [&](const Interval& iv) { return uniform(iv.lo, iv.hi); };

  Scenario s;
  s.seed = seed;
  s.domain_diameter = cfg.box_size * std::sqrt(3.0);
  s.loiter_accel = cfg.loiter_accel;
  s.exclusive_targets = cfg.exclusive_targets;
  s.reallocate = cfg.reallocate;
  s.steps = cfg.steps;

  s.agents.resize(static_cast<std::size_t>(cfg.n_agents));
  for (int i = 0; i < cfg.n_agents; ++i) {
    AgentState& a = s.agents[i];
    for (int d = 0; d < 3; ++d) a.position[d] = uniform(0.0, cfg.box_size);
    a.velocity.setZero();
    a.comm_factor = cfg.phi.size() == 1 ? cfg.phi[0] : cfg.phi[i];
  }
  s.targets.resize(static_cast<std::size_t>(cfg.n_targets));
  for (auto& t : s.targets) {
    for (int d = 0; d < 3; ++d) t.position[d] = uniform(0.0, cfg.box_size);
    for (int d = 0; d < 3; ++d) t.velocity[d] = uniform(-cfg.target_speed, cfg.target_speed);
    t.end_time = draw(cfg.end_time);
    t.obs_duration = draw(cfg.obs_duration);
    t.obs_radius = draw(cfg.obs_radius);
    t.info_value = draw(cfg.info_value);
    t.decay = cfg.lambda;
    t.drag_coeff = cfg.drag_coeff;
  }
  double horizon = 0.0;
  for (const auto& t : s.targets) horizon = std::max(horizon, t.end_time);
  s.dt = horizon / cfg.steps;

  if (!cfg.budgets.empty()) {
    for (int i = 0; i < cfg.n_agents; ++i) s.agents[i].fuel = cfg.budgets[i];
  } else {
    const CostTable costs = initial_pair_costs(s);
    std::vector<double> finite;
    for (double c : costs.values())
      if (std::isfinite(c)) finite.push_back(c);
    const double e = cfg.budget_factor * median(finite);
    for (auto& a : s.agents) a.fuel = e;
  }
  return s;
}

}  // namespace dgba

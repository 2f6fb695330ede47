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

// The distributed greedy bundles protocol.
//
// Every agent i keeps three length-N bundles: W_i (its belief of each
// agent's target, kNoTarget when unassigned), B_i (the bid behind that
// target) and F_i (finalization flags). A round is three synchronous
// phases:
//
//   I   assignment     unfinalized agents bid their best marginal gain
//   II  communication  self entries are copied from neighbours, conflicts
//                      on a target go to the highest bid (lowest id on ties)
//   III implementation winners whose lock condition holds are committed,
//                      then the world advances one step
//
// Phase II reads a frozen snapshot of every self entry taken after phase I,
// so the result does not depend on agent processing order.
//
// A finalization won in phase II is provisional until the world reports the
// lock condition for the target. In a static world that is immediate. In
// the satellite world it is the observation transition, and until then a
// newly met neighbour with a better claim can still take the target.

#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dgba/common.hpp"
#include "dgba/independence.hpp"
#include "dgba/satellite.hpp"
#include "dgba/submodular.hpp"

namespace dgba {

enum class AgentMode { kIdle, kManeuvering, kObserving };

inline const char* to_string(AgentMode m) {
  switch (m) {
    case AgentMode::kIdle: return "idle";
    case AgentMode::kManeuvering: return "maneuvering";
    case AgentMode::kObserving: return "observing";
  }
  return "?";
}

struct BundleState {
  std::vector<int> w;
  std::vector<double> b;
  std::vector<char> f;

  BundleState() = default;
  explicit BundleState(int n)
      : w(static_cast<std::size_t>(n), kNoTarget), b(static_cast<std::size_t>(n), 0.0),
        f(static_cast<std::size_t>(n), 0) {}

  int size() const { return static_cast<int>(w.size()); }

  void reset(int k) {
    w[k] = kNoTarget;
    b[k] = 0.0;
    f[k] = 0;
  }

  friend bool operator==(const BundleState&, const BundleState&) = default;
};

struct AgentRuntime {
  int id = 0;
  BundleState bundle;
  double remaining_budget = std::numeric_limits<double>::infinity();
  AgentMode mode = AgentMode::kIdle;
  bool locked = false;
  /// Last self entry received from each agent; heard[k] is 0 before the first.
  BundleState received;
  std::vector<char> heard;

  AgentRuntime() = default;
  AgentRuntime(int agent_id, int n_agents)
      : id(agent_id), bundle(n_agents), received(n_agents),
        heard(static_cast<std::size_t>(n_agents), 0) {}

  int target() const { return bundle.w[id]; }
  bool finalized() const { return bundle.f[id] != 0; }
};

/// One sample of a solver's time series.
struct StepSample {
  int step = 0;
  double time = 0.0;
  double utility = 0.0;
  long long messages = 0;
  double cumulative_cost = 0.0;
};

struct SolverResult {
  std::string solver;
  AllocationPolicy policy;
  double utility = 0.0;
  std::vector<double> per_agent_cost;
  long long rounds = 0;
  long long messages = 0;
  /// Rounds in which at least one message was exchanged.
  long long communication_rounds = 0;
  double wall_time_s = 0.0;
  /// Time spent exchanging and reconciling bundles or bids.
  double communication_time_s = 0.0;
  std::vector<StepSample> series;

  double messages_per_round() const {
    return communication_rounds ? static_cast<double>(messages) / communication_rounds : 0.0;
  }
};

// ---------------------------------------------------------------------------
// Worlds

/// Everything the protocol needs from its environment.
class World {
 public:
  virtual ~World() = default;

  virtual int n_agents() const = 0;
  virtual int n_targets() const = 0;
  /// Utility oracle at the current time.
  virtual const UtilityOracle& oracle() const = 0;
  virtual const CommGraph& graph() const = 0;
  /// True when a target may be held by at most one agent.
  virtual bool exclusive_targets() const = 0;
  /// out[j] = 1 iff agent may take j given the finalized entries it knows of.
  virtual void available_targets(int agent, const AllocationPolicy& allocated,
                                 std::vector<char>& out) const = 0;
  /// Whether a provisional finalization of (agent, target) commits now.
  /// target == kNoTarget asks whether an agent with nothing to do can stop.
  virtual bool lock_ready(int agent, int target) const = 0;
  /// Whether an agent has finished its work on a committed target.
  virtual bool observation_complete(int /*agent*/, int /*target*/) const { return false; }
  /// Phase III physics for one step.
  virtual void advance(const std::vector<AgentRuntime>& agents) = 0;
  /// Dynamic worlds keep advancing to the horizon once allocation is done.
  virtual bool dynamic() const = 0;
  /// Maximum number of rounds.
  virtual int horizon() const = 0;
  virtual double time() const = 0;
  virtual std::vector<double> accrued_costs() const = 0;
  virtual double remaining_budget(int /*agent*/) const {
    return std::numeric_limits<double>::infinity();
  }
};

/// A world whose oracle, constraints and graph never change.
class StaticWorld final : public World {
 public:
  /// `costs` (optional, N x M) is used only for cost accounting.
  StaticWorld(std::shared_ptr<const UtilityOracle> oracle,
              std::shared_ptr<const IndependenceSystem> constraints, CommGraph graph,
              CostTable costs = {}, int horizon = 0)
      : oracle_(std::move(oracle)), constraints_(std::move(constraints)),
        graph_(std::move(graph)), costs_(std::move(costs)) {
    if (!oracle_ || !constraints_) throw ConfigurationError("StaticWorld: null oracle or constraints");
    const int n = oracle_->n_agents(), m = oracle_->n_targets();
    if (constraints_->n_agents() != n || constraints_->n_targets() != m)
      throw ConfigurationError("StaticWorld: oracle and constraint dimensions differ");
    if (graph_.size() != n) throw ConfigurationError("StaticWorld: graph size differs from N");
    if (costs_.n_agents() != 0 && (costs_.n_agents() != n || costs_.n_targets() != m))
      throw ConfigurationError("StaticWorld: cost table dimensions differ");
    horizon_ = horizon > 0 ? horizon : 4 * n + 4;
    exclusive_ = detect_exclusive(*constraints_);
    committed_cost_.assign(static_cast<std::size_t>(n), 0.0);
  }

  int n_agents() const override { return oracle_->n_agents(); }
  int n_targets() const override { return oracle_->n_targets(); }
  const UtilityOracle& oracle() const override { return *oracle_; }
  const CommGraph& graph() const override { return graph_; }
  const IndependenceSystem& constraints() const { return *constraints_; }
  bool exclusive_targets() const override { return exclusive_; }

  void available_targets(int agent, const AllocationPolicy& allocated,
                         std::vector<char>& out) const override {
    constraints_->feasible_targets(allocated, agent, out);
  }

  bool lock_ready(int, int) const override { return true; }
  bool dynamic() const override { return false; }
  int horizon() const override { return horizon_; }
  double time() const override { return static_cast<double>(round_); }

  void advance(const std::vector<AgentRuntime>& agents) override {
    ++round_;
    if (costs_.n_agents() == 0) return;
    for (const auto& a : agents)
      committed_cost_[a.id] = a.locked && a.target() != kNoTarget ? costs_(a.id, a.target()) : 0.0;
  }

  std::vector<double> accrued_costs() const override { return committed_cost_; }

 private:
  static bool detect_exclusive(const IndependenceSystem& s) {
    if (dynamic_cast<const TargetExclusiveConstraint*>(&s)) return true;
    if (auto c = dynamic_cast<const ConstraintIntersection*>(&s))
      for (const auto& p : c->parts())
        if (detect_exclusive(*p)) return true;
    return false;
  }

  std::shared_ptr<const UtilityOracle> oracle_;
  std::shared_ptr<const IndependenceSystem> constraints_;
  CommGraph graph_;
  CostTable costs_;
  int horizon_ = 1;
  bool exclusive_ = false;
  int round_ = 0;
  std::vector<double> committed_cost_;
};

// ---------------------------------------------------------------------------
// Phases

/// Phase I for one agent. `policy` must not contain the agent's own element.
/// Picks the available target of largest positive gain (lowest id on ties);
/// an agent with no such target finalizes to kNoTarget.
inline void dgba_assignment_phase(AgentRuntime& agent, const AllocationPolicy& policy,
                                  const std::vector<char>& available,
                                  const UtilityOracle& oracle) {
  BundleState& bs = agent.bundle;
  if (bs.f[agent.id]) return;
  const std::vector<double> gains = oracle.marginal_gains(policy, agent.id);
  int best = kNoTarget;
  double best_gain = 0.0;
  for (int j = 0; j < static_cast<int>(gains.size()); ++j) {
    if (j < static_cast<int>(available.size()) && available[j] && gains[j] > best_gain) {
      best = j;
      best_gain = gains[j];
    }
  }
  bs.w[agent.id] = best;
  bs.b[agent.id] = best == kNoTarget ? 0.0 : best_gain;
  if (best == kNoTarget) bs.f[agent.id] = 1;
}

namespace detail {

/// (b, -id) ordering: larger bid wins, lower id breaks ties.
inline bool outbids(double b1, int k1, double b2, int k2) {
  return b1 > b2 || (b1 == b2 && k1 < k2);
}

struct ConflictScratch {
  std::vector<int> best_pending;
  std::vector<int> best_holder;
};

/// Resolves every target's conflict set inside one agent's view.
inline void resolve_conflicts(BundleState& view, int self, bool self_locked, bool exclusive,
                              int n_targets, ConflictScratch& s) {
  s.best_pending.assign(static_cast<std::size_t>(n_targets), -1);
  s.best_holder.assign(static_cast<std::size_t>(n_targets), -1);
  const int n = view.size();
  for (int k = 0; k < n; ++k) {
    const int j = view.w[k];
    if (j == kNoTarget) continue;
    int& slot = view.f[k] ? s.best_holder[j] : s.best_pending[j];
    if (slot < 0 || outbids(view.b[k], k, view.b[slot], slot)) slot = k;
  }
  for (int k = 0; k < n; ++k) {
    const int j = view.w[k];
    if (j == kNoTarget) continue;
    if (!view.f[k]) {
      if (exclusive && s.best_holder[j] >= 0) {
        view.reset(k);
      } else if (s.best_pending[j] == k) {
        view.f[k] = 1;
      } else {
        view.reset(k);
      }
    } else if (exclusive && s.best_holder[j] != k && !(k == self && self_locked)) {
      view.reset(k);
    }
  }
}

}  // namespace detail

/// Phase II for every agent. Every agent reads the current self entry of
/// each neighbour. A neighbour's entry costs a message only when it differs
/// from the last one that agent received from it; re-sending an unchanged
/// triple would leave the receiver's view as it is. Returns the message count.
inline long long dgba_communication_phase(std::vector<AgentRuntime>& agents,
                                          const CommGraph& graph, bool exclusive_targets,
                                          int n_targets) {
  const int n = static_cast<int>(agents.size());
  if (graph.size() != n) throw ConfigurationError("communication phase: graph size differs from N");
  if (!graph.is_symmetric())
    throw ContractViolation("communication phase: adjacency must be symmetric with zero diagonal");

  struct Entry {
    int w;
    double b;
    char f;
  };
  std::vector<Entry> snapshot(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    snapshot[k] = {agents[k].bundle.w[k], agents[k].bundle.b[k], agents[k].bundle.f[k]};

  long long messages = 0;
  detail::ConflictScratch scratch;
  for (int i = 0; i < n; ++i) {
    BundleState& view = agents[i].bundle;
    AgentRuntime& self = agents[i];
    for (int k = 0; k < n; ++k) {
      if (graph(i, k) <= 0.0) continue;
      const Entry& e = snapshot[k];
      if (!self.heard[k] || self.received.w[k] != e.w || self.received.b[k] != e.b ||
          self.received.f[k] != e.f) {
        self.heard[k] = 1;
        self.received.w[k] = e.w;
        self.received.b[k] = e.b;
        self.received.f[k] = e.f;
        ++messages;
      }
      view.w[k] = e.w;
      view.b[k] = e.b;
      view.f[k] = e.f;
    }
    detail::resolve_conflicts(view, i, agents[i].locked, exclusive_targets, n_targets, scratch);
  }
  return messages;
}

// ---------------------------------------------------------------------------
// Run loop

/// One round of the trace.
struct RoundRecord {
  int round = 0;
  double time = 0.0;
  /// Committed (locked) policy after phase III.
  AllocationPolicy committed;
  /// Every finalized self entry, provisional or locked.
  AllocationPolicy current;
  std::vector<int> w;
  std::vector<double> b;
  std::vector<char> f;
  /// Agents whose element entered the committed policy this round.
  std::vector<int> decided;
  /// O(committed after) - O(committed before), and the sum of each decided
  /// element's gain over the committed-before policy; one oracle snapshot.
  double increment = 0.0;
  double increment_terms = 0.0;
  double committed_utility = 0.0;
  /// Utility of `current` after the world advanced.
  double utility = 0.0;
  long long messages = 0;
  double cumulative_cost = 0.0;
  /// Phase wall times; zero for phases that did no work. Phase III is
  /// timed only when a trace is recorded.
  double assignment_s = 0.0;
  double communication_s = 0.0;
  double implementation_s = 0.0;
};

struct DgbaOptions {
  bool record_trace = true;
  /// Re-open uncovered targets for agents that finished their observation.
  bool reallocate = false;
};

struct DgbaRun {
  SolverResult result;
  std::vector<RoundRecord> trace;
  /// Final agent states.
  std::vector<AgentRuntime> agents;
  /// Time spent on trace bookkeeping, excluded from result.wall_time_s.
  double check_time_s = 0.0;
};

inline DgbaRun dgba_run(World& world, const DgbaOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  const auto t_start = Clock::now();

  const int n = world.n_agents();
  const int m = world.n_targets();
  if (n < 1 || m < 1) throw ConfigurationError("dgba_run: need N >= 1 and M >= 1");
  if (world.oracle().n_agents() != n || world.oracle().n_targets() != m)
    throw ConfigurationError("dgba_run: oracle dimensions differ from the world");
  if (world.horizon() < 1) throw ConfigurationError("dgba_run: horizon must be >= 1");

  DgbaRun run;
  run.result.solver = "dgba";
  std::vector<AgentRuntime> agents;
  agents.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    agents.emplace_back(i, n);
    agents.back().remaining_budget = world.remaining_budget(i);
  }

  double check_s = 0.0;
  // Self entries, locks and links as of the last exchange.
  bool exchanged = false;
  CommGraph last_graph;
  std::vector<int> last_w(static_cast<std::size_t>(n), kNoTarget);
  std::vector<double> last_b(static_cast<std::size_t>(n), 0.0);
  std::vector<char> last_f(static_cast<std::size_t>(n), 0), last_locked(static_cast<std::size_t>(n), 0);
  AllocationPolicy committed;
  // Elements from completed earlier allocation rounds (reallocation only).
  AllocationPolicy archived;
  std::vector<char> available;
  AllocationPolicy view_policy, view_final, current;
  std::vector<int> cur_w(static_cast<std::size_t>(n), kNoTarget);

  auto all_locked = [&] {
    return std::all_of(agents.begin(), agents.end(), [](const AgentRuntime& a) { return a.locked; });
  };

  for (int round = 0; round < world.horizon(); ++round) {
    RoundRecord rec;
    rec.round = round;
    rec.time = world.time();
    const bool allocating = !all_locked();

    // Phase I. Clocks are read only around work that happens, so idle
    // rounds cost no timer calls.
    if (allocating) {
      const auto t0 = Clock::now();
      const UtilityOracle& oracle = world.oracle();
      for (auto& a : agents) {
        if (a.locked) continue;
        BundleState& bs = a.bundle;
        // An exhausted agent that has not been allowed to stop keeps looking.
        if (bs.f[a.id] && bs.w[a.id] == kNoTarget) bs.f[a.id] = 0;
        if (bs.f[a.id]) continue;
        view_policy = archived;
        view_final.clear();
        for (int k = 0; k < n; ++k) {
          if (k == a.id || bs.w[k] == kNoTarget) continue;
          view_policy.insert({k, bs.w[k]});
          if (bs.f[k]) view_final.insert({k, bs.w[k]});
        }
        for (const auto& e : archived)
          if (e.agent != a.id) view_final.insert(e);
        world.available_targets(a.id, view_final, available);
        dgba_assignment_phase(a, view_policy, available, oracle);
      }
      rec.assignment_s = seconds(t0, Clock::now());
    }

    // Phase II. When no self entry, lock or link changed since the entries
    // last sent, every view is already resolved and nothing new can arrive,
    // so the exchange is skipped.
    if (allocating) {
      bool changed = !exchanged || !(world.graph() == last_graph);
      for (int k = 0; k < n && !changed; ++k) {
        const BundleState& bs = agents[k].bundle;
        changed = last_w[k] != bs.w[k] || last_b[k] != bs.b[k] || last_f[k] != bs.f[k] ||
                  last_locked[k] != static_cast<char>(agents[k].locked);
      }
      if (changed) {
        const auto t1 = Clock::now();
        for (int k = 0; k < n; ++k) {
          const BundleState& bs = agents[k].bundle;
          last_w[k] = bs.w[k];
          last_b[k] = bs.b[k];
          last_f[k] = bs.f[k];
          last_locked[k] = static_cast<char>(agents[k].locked);
        }
        rec.messages =
            dgba_communication_phase(agents, world.graph(), world.exclusive_targets(), m);
        exchanged = true;
        last_graph = world.graph();
        rec.communication_s = seconds(t1, Clock::now());
      }
    }

    // Phase III.
    const auto t2 = options.record_trace ? Clock::now() : Clock::time_point{};
    for (auto& a : agents) {
      if (a.locked) continue;
      const int j = a.target();
      if (j != kNoTarget) {
        if (a.finalized()) {
          a.mode = AgentMode::kManeuvering;
          if (world.lock_ready(a.id, j)) {
            a.locked = true;
            a.mode = AgentMode::kObserving;
            rec.decided.push_back(a.id);
          }
        }
      } else if (a.finalized() && world.lock_ready(a.id, kNoTarget)) {
        a.locked = true;
      }
    }
    if (!rec.decided.empty() || options.record_trace) {
      AllocationPolicy next = committed;
      for (int i : rec.decided) next.insert({i, agents[i].target()});
      if (options.record_trace) {
        // Both sides of the increment identity use this pre-advance oracle.
        const auto tc = Clock::now();
        const UtilityOracle& pre = world.oracle();
        rec.increment = pre.evaluate(next) - pre.evaluate(committed);
        for (int i : rec.decided)
          rec.increment_terms += marginal_gain(pre, committed, {i, agents[i].target()});
        rec.committed_utility = pre.evaluate(next);
        check_s += seconds(tc, Clock::now());
      }
      committed = std::move(next);
    }

    world.advance(agents);

    bool reopened = false;
    if (options.reallocate && all_locked()) {
      // Agents done observing re-enter with a fresh bundle; targets nobody
      // covers become biddable again through the usual availability rules.
      for (auto& a : agents) {
        const int j = a.target();
        if (j == kNoTarget || !world.observation_complete(a.id, j)) continue;
        archived.insert({a.id, j});
        a.bundle = BundleState(n);
        a.locked = false;
        a.mode = AgentMode::kIdle;
        reopened = true;
      }
      if (reopened)
        for (auto& a : agents)
          for (int k = 0; k < n; ++k)
            if (!agents[k].locked && a.id != k) a.bundle.reset(k);
    }
    if (options.record_trace) rec.implementation_s = seconds(t2, Clock::now());

    // Rebuilt only when a finalized self entry changed.
    bool stale = reopened || round == 0;
    for (int k = 0; k < n && !stale; ++k) {
      const AgentRuntime& a = agents[k];
      stale = cur_w[k] != (a.finalized() ? a.target() : kNoTarget);
    }
    if (stale) {
      current = archived;
      for (int k = 0; k < n; ++k) {
        const AgentRuntime& a = agents[k];
        cur_w[k] = a.finalized() ? a.target() : kNoTarget;
        if (cur_w[k] != kNoTarget) current.insert({a.id, cur_w[k]});
      }
    }
    rec.utility = world.oracle().evaluate(current);
    const std::vector<double> costs = world.accrued_costs();
    for (double c : costs) rec.cumulative_cost += c;

    run.result.messages += rec.messages;
    if (rec.messages > 0) ++run.result.communication_rounds;
    run.result.communication_time_s += rec.communication_s;
    run.result.series.push_back(
        {round, world.time(), rec.utility, rec.messages, rec.cumulative_cost});
    run.result.rounds = round + 1;

    if (options.record_trace) {
      const auto tc = Clock::now();
      rec.committed = committed;
      rec.current = current;
      for (const auto& a : agents) {
        rec.w.push_back(a.bundle.w[a.id]);
        rec.b.push_back(a.bundle.b[a.id]);
        rec.f.push_back(a.bundle.f[a.id]);
      }
      run.trace.push_back(std::move(rec));
      check_s += seconds(tc, Clock::now());
    }

    if (!world.dynamic() && all_locked()) break;
  }

  run.result.policy = committed.united(archived);
  run.result.per_agent_cost = world.accrued_costs();
  run.result.utility =
      run.result.series.empty() ? 0.0 : run.result.series.back().utility;
  if (!world.dynamic()) run.result.utility = world.oracle().evaluate(run.result.policy);
  for (auto& a : agents) a.remaining_budget = world.remaining_budget(a.id);
  run.agents = std::move(agents);
  // Trace bookkeeping is verification, not protocol work.
  run.check_time_s = check_s;
  run.result.wall_time_s = seconds(t_start, Clock::now()) - check_s;
  return run;
}

/// Static convenience form: fixed oracle, constraints and graph.
inline DgbaRun dgba_run(std::shared_ptr<const UtilityOracle> oracle,
                        std::shared_ptr<const IndependenceSystem> constraints, CommGraph graph,
                        int horizon = 0, const DgbaOptions& options = {}) {
  StaticWorld world(std::move(oracle), std::move(constraints), std::move(graph), {}, horizon);
  return dgba_run(world, options);
}

}  // namespace dgba

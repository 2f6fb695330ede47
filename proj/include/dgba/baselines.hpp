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

// Reference solvers: centralized sequential greedy, exhaustive search and a
// flooding auction.
//
// The auction is a simplified consensus auction, not a full CBBA. Each
// round every unassigned agent bids the stand-alone utility of its best
// target (no marginal reasoning), the per-target maximum bids are flooded
// over the graph until no table changes, and every agent that holds the
// maximum for its target wins it for good. Targets are always exclusive.
// Agents in different components may win the same target.

#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "dgba/common.hpp"
#include "dgba/dgba.hpp"
#include "dgba/independence.hpp"
#include "dgba/submodular.hpp"

namespace dgba {

inline SolverResult sequential_greedy(const UtilityOracle& oracle,
                                      const IndependenceSystem& constraints,
                                      const std::vector<GroundElement>& ground) {
  const auto start = std::chrono::steady_clock::now();
  if (oracle.n_agents() != constraints.n_agents() || oracle.n_targets() != constraints.n_targets())
    throw ConfigurationError("sequential_greedy: oracle and constraint dimensions differ");
  std::vector<GroundElement> order = ground;
  std::sort(order.begin(), order.end());
  check_bounds(AllocationPolicy(order.begin(), order.end()), oracle.n_agents(),
               oracle.n_targets());

  SolverResult r;
  r.solver = "sequential_greedy";
  AllocationPolicy policy;
  for (;;) {
    const GroundElement* best = nullptr;
    double best_gain = 0.0;
    for (const auto& e : order) {
      if (policy.contains(e)) continue;
      const double g = marginal_gain(oracle, policy, e);
      if (g > best_gain && constraints.accepts(policy.with(e))) {
        best = &e;
        best_gain = g;
      }
    }
    if (!best) break;
    policy.insert(*best);
    ++r.rounds;
  }
  r.policy = policy;
  r.utility = oracle.evaluate(policy);
  r.per_agent_cost.assign(static_cast<std::size_t>(oracle.n_agents()), 0.0);
  if (auto c = dynamic_cast<const ConstraintIntersection*>(&constraints); c && c->budget())
    for (const auto& e : policy) r.per_agent_cost[e.agent] += c->budget()->costs()(e.agent, e.target);
  r.series.push_back({0, 0.0, r.utility, 0, 0.0});
  for (double c : r.per_agent_cost) r.series.back().cumulative_cost += c;
  r.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline constexpr double kExactOracleCap = 1e7;

/// Exhaustive search over every map agent -> {none, 0..M-1}. Maps are
/// visited in lexicographic order (agent 0 most significant, none first) and
/// the first strict maximum is kept.
inline SolverResult exact_oracle(const UtilityOracle& oracle, const IndependenceSystem& constraints,
                                 int n_agents, int n_targets, double cap = kExactOracleCap) {
  const auto start = std::chrono::steady_clock::now();
  if (oracle.n_agents() != n_agents || oracle.n_targets() != n_targets ||
      constraints.n_agents() != n_agents || constraints.n_targets() != n_targets)
    throw ConfigurationError("exact_oracle: dimensions differ");
  const double count = std::pow(static_cast<double>(n_targets + 1), n_agents);
  if (count > cap) {
    std::ostringstream os;
    os << "exact_oracle: (M+1)^N = " << count << " exceeds cap " << cap;
    throw SizeError(os.str());
  }

  SolverResult r;
  r.solver = "exact_oracle";
  std::vector<int> digit(static_cast<std::size_t>(n_agents), 0);  // 0 = none, else target + 1
  double best = -1.0;
  AllocationPolicy policy;
  for (;;) {
    policy.clear();
    for (int i = 0; i < n_agents; ++i)
      if (digit[i]) policy.insert({i, digit[i] - 1});
    if (constraints.accepts(policy)) {
      const double v = oracle.evaluate(policy);
      if (v > best) {
        best = v;
        r.policy = policy;
      }
    }
    ++r.rounds;
    int k = n_agents - 1;
    while (k >= 0 && ++digit[k] > n_targets) digit[k--] = 0;
    if (k < 0) break;
  }
  r.utility = best < 0.0 ? 0.0 : best;
  r.per_agent_cost.assign(static_cast<std::size_t>(n_agents), 0.0);
  if (auto c = dynamic_cast<const ConstraintIntersection*>(&constraints); c && c->budget())
    for (const auto& e : r.policy) r.per_agent_cost[e.agent] += c->budget()->costs()(e.agent, e.target);
  r.series.push_back({0, 0.0, r.utility, 0, 0.0});
  for (double c : r.per_agent_cost) r.series.back().cumulative_cost += c;
  r.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline SolverResult auction_baseline(World& world) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const int n = world.n_agents();
  const int m = world.n_targets();
  if (n < 1 || m < 1) throw ConfigurationError("auction_baseline: need N >= 1 and M >= 1");
  if (world.oracle().n_agents() != n || world.oracle().n_targets() != m)
    throw ConfigurationError("auction_baseline: oracle dimensions differ from the world");

  struct Bid {
    double value = -1.0;
    int agent = -1;
    bool beats(const Bid& o) const {
      return agent >= 0 && (o.agent < 0 || value > o.value || (value == o.value && agent < o.agent));
    }
    bool operator==(const Bid&) const = default;
  };

  SolverResult r;
  r.solver = "auction_baseline";
  std::vector<AgentRuntime> agents;
  for (int i = 0; i < n; ++i) agents.emplace_back(i, n);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  // winners[i][j]: the winner of j as known to agent i, or -1.
  std::vector<std::vector<int>> winners(n, std::vector<int>(static_cast<std::size_t>(m), -1));
  std::vector<std::vector<Bid>> table(n, std::vector<Bid>(static_cast<std::size_t>(m)));
  std::vector<std::vector<Bid>> next_table = table;
  std::vector<std::vector<int>> next_winners = winners;
  std::vector<std::vector<Bid>> sent_table = table;
  std::vector<std::vector<int>> sent_winners = winners;
  // version[k] changes whenever agent k's tables do; heard[i][k] is the
  // version of k that i last received.
  std::vector<long long> version(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<long long>> heard(n, std::vector<long long>(static_cast<std::size_t>(n), -1));
  std::vector<int> bid_target(static_cast<std::size_t>(n), kNoTarget);
  std::vector<char> available;
  const AllocationPolicy empty;

  AllocationPolicy assigned;
  for (int step = 0; step < world.horizon(); ++step) {
    long long step_messages = 0;
    const bool active = std::any_of(done.begin(), done.end(), [](char d) { return !d; });
    if (active) {
      const auto t_comm = Clock::now();
      const UtilityOracle& oracle = world.oracle();
      bool any_bid = false;
      for (int i = 0; i < n; ++i) {
        std::fill(table[i].begin(), table[i].end(), Bid{});
        bid_target[i] = kNoTarget;
        if (done[i]) continue;
        AllocationPolicy known;
        for (int j = 0; j < m; ++j)
          if (winners[i][j] >= 0 && winners[i][j] != i) known.insert({winners[i][j], j});
        world.available_targets(i, known, available);
        const std::vector<double> base = oracle.marginal_gains(empty, i);
        double best = 0.0;
        for (int j = 0; j < m; ++j) {
          if (!available[j] || winners[i][j] >= 0) continue;
          if (base[j] > best) {
            best = base[j];
            bid_target[i] = j;
          }
        }
        if (bid_target[i] == kNoTarget) {
          if (world.lock_ready(i, kNoTarget)) done[i] = 1;
          continue;
        }
        table[i][bid_target[i]] = {best, i};
        any_bid = true;
      }

      for (int i = 0; i < n; ++i)
        if (table[i] != sent_table[i] || winners[i] != sent_winners[i]) ++version[i];

      if (any_bid) {
        // Synchronous flooding of bid maxima and known winners. An agent's
        // tables travel over an edge only when they changed since the last
        // delivery on that edge.
        const CommGraph& g = world.graph();
        for (bool changed = true; changed;) {
          changed = false;
          long long iteration_messages = 0;
          next_table = table;
          next_winners = winners;
          for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
              if (g(i, k) <= 0.0 || heard[i][k] == version[k]) continue;
              heard[i][k] = version[k];
              ++iteration_messages;
              for (int j = 0; j < m; ++j) {
                if (table[k][j].beats(next_table[i][j])) next_table[i][j] = table[k][j];
                if (next_winners[i][j] < 0 && winners[k][j] >= 0) next_winners[i][j] = winners[k][j];
              }
            }
          }
          for (int i = 0; i < n; ++i) {
            if (next_table[i] != table[i] || next_winners[i] != winners[i]) {
              ++version[i];
              changed = true;
            }
          }
          std::swap(table, next_table);
          std::swap(winners, next_winners);
          ++r.rounds;
          if (iteration_messages > 0) ++r.communication_rounds;
          step_messages += iteration_messages;
        }
        sent_table = table;
        sent_winners = winners;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < m; ++j)
            if (winners[i][j] < 0 && table[i][j].agent >= 0) winners[i][j] = table[i][j].agent;
          const int j = bid_target[i];
          if (j == kNoTarget || table[i][j].agent != i) continue;
          done[i] = 1;
          agents[i].bundle.w[i] = j;
          agents[i].bundle.b[i] = table[i][j].value;
          agents[i].bundle.f[i] = 1;
          agents[i].locked = true;
          agents[i].mode = AgentMode::kManeuvering;
          assigned.insert({i, j});
        }
      }
      r.communication_time_s += std::chrono::duration<double>(Clock::now() - t_comm).count();
    }

    world.advance(agents);
    r.messages += step_messages;
    StepSample sample{step, world.time(), world.oracle().evaluate(assigned), step_messages, 0.0};
    for (double c : world.accrued_costs()) sample.cumulative_cost += c;
    r.series.push_back(sample);
    if (!world.dynamic() && std::all_of(done.begin(), done.end(), [](char d) { return d != 0; }))
      break;
  }
  r.policy = assigned;
  r.per_agent_cost = world.accrued_costs();
  r.utility = r.series.empty() ? 0.0 : r.series.back().utility;
  r.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

}  // namespace dgba

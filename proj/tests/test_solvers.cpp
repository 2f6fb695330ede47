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

#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <set>
#include <vector>

#include "dgba/baselines.hpp"
#include "dgba/bounds.hpp"
#include "dgba/dgba.hpp"
#include "dgba/satellite.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using dgba::AgentRuntime;
using dgba::AllocationPolicy;
using dgba::CommGraph;
using dgba::kNoTarget;

std::shared_ptr<const dgba::ObservationOracle> observation(const support::Instance& in) {
  return std::make_shared<dgba::ObservationOracle>(in.p, in.rho);
}

std::shared_ptr<const dgba::ConstraintIntersection> partition_only(int n, int m) {
  auto c = std::make_shared<dgba::ConstraintIntersection>(n, m);
  c->add(std::make_shared<dgba::PartitionConstraint>(n, m));
  return c;
}

std::shared_ptr<const dgba::ConstraintIntersection> exclusive(int n, int m) {
  auto c = std::make_shared<dgba::ConstraintIntersection>(n, m);
  c->add(std::make_shared<dgba::PartitionConstraint>(n, m));
  c->add(std::make_shared<dgba::TargetExclusiveConstraint>(n, m));
  return c;
}

std::vector<AgentRuntime> runtimes(int n) {
  std::vector<AgentRuntime> out;
  for (int i = 0; i < n; ++i) out.emplace_back(i, n);
  return out;
}

void bid(AgentRuntime& a, int target, double value) {
  a.bundle.w[a.id] = target;
  a.bundle.b[a.id] = value;
}

// Random connected graph: a random spanning tree plus extra edges.
CommGraph random_connected_graph(std::mt19937_64& rng, int n, double extra) {
  CommGraph g(n);
  for (int i = 1; i < n; ++i) g.connect(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
  std::bernoulli_distribution coin(extra);
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (coin(rng)) g.connect(i, k);
  return g;
}

TEST(AssignmentPhase, FinalizedAgentIsUnchanged) {
  const auto in = support::two_agent_instance();
  const auto o = observation(in);
  AgentRuntime a(0, 2);
  bid(a, 1, 0.3);
  a.bundle.f[0] = 1;
  const auto before = a.bundle;
  dgba::dgba_assignment_phase(a, {}, {1, 1}, *o);
  EXPECT_EQ(a.bundle, before);
}

TEST(AssignmentPhase, PicksLargestGain) {
  const auto in = support::two_agent_instance();
  const auto o = observation(in);
  AgentRuntime a(0, 2);
  dgba::dgba_assignment_phase(a, {}, {1, 1}, *o);
  EXPECT_EQ(a.target(), 0);
  EXPECT_NEAR(a.bundle.b[0], ref::frozen::kSingleGain, 1e-12);
  EXPECT_FALSE(a.finalized());
}

TEST(AssignmentPhase, RespectsAvailability) {
  const auto in = support::two_agent_instance();
  const auto o = observation(in);
  AgentRuntime a(1, 2);
  dgba::dgba_assignment_phase(a, {}, {0, 1}, *o);
  EXPECT_EQ(a.target(), 1);
  EXPECT_NEAR(a.bundle.b[1], ref::frozen::kFarGain, 1e-12);
}

TEST(AssignmentPhase, TiesGoToLowestTarget) {
  const dgba::AdditiveOracle o({{0.5, 0.7, 0.7}});
  AgentRuntime a(0, 1);
  dgba::dgba_assignment_phase(a, {}, {1, 1, 1}, o);
  EXPECT_EQ(a.target(), 1);
}

TEST(AssignmentPhase, NothingAvailableFinalizesToNoTarget) {
  const dgba::AdditiveOracle o({{0.5, 0.7}});
  AgentRuntime a(0, 1);
  dgba::dgba_assignment_phase(a, {}, {0, 0}, o);
  EXPECT_EQ(a.target(), kNoTarget);
  EXPECT_TRUE(a.finalized());
  EXPECT_EQ(a.bundle.b[0], 0.0);
}

TEST(CommunicationPhase, NoNeighborsNoMessages) {
  auto agents = runtimes(2);
  bid(agents[0], 0, 0.9);
  bid(agents[1], 1, 0.2);
  const auto b0 = agents[0].bundle;
  EXPECT_EQ(dgba::dgba_communication_phase(agents, CommGraph(2), true, 2), 0);
  // Alone, an agent wins its own conflict set.
  EXPECT_EQ(agents[0].target(), b0.w[0]);
  EXPECT_TRUE(agents[0].finalized());
  EXPECT_EQ(agents[0].bundle.w[1], kNoTarget);
}

TEST(CommunicationPhase, EqualBidsGoToLowestAgent) {
  auto agents = runtimes(2);
  bid(agents[0], 0, ref::frozen::kSingleGain);
  bid(agents[1], 0, ref::frozen::kSingleGain);
  const long long msgs = dgba::dgba_communication_phase(agents, CommGraph::complete(2), true, 2);
  EXPECT_EQ(msgs, 2);
  EXPECT_TRUE(agents[0].finalized());
  EXPECT_EQ(agents[0].target(), 0);
  EXPECT_EQ(agents[1].target(), kNoTarget);
  EXPECT_FALSE(agents[1].finalized());
  EXPECT_EQ(agents[1].bundle.w[0], 0);
  EXPECT_EQ(agents[1].bundle.f[0], 1);
}

TEST(CommunicationPhase, DifferentTargetsBothFinalize) {
  auto agents = runtimes(2);
  bid(agents[0], 0, 0.9);
  bid(agents[1], 1, 0.2);
  dgba::dgba_communication_phase(agents, CommGraph::complete(2), true, 2);
  EXPECT_TRUE(agents[0].finalized());
  EXPECT_TRUE(agents[1].finalized());
  EXPECT_EQ(agents[0].target(), 0);
  EXPECT_EQ(agents[1].target(), 1);
}

TEST(CommunicationPhase, UnchangedEntriesAreNotResent) {
  auto agents = runtimes(3);
  bid(agents[0], 0, 0.9);
  bid(agents[1], 1, 0.5);
  bid(agents[2], 2, 0.4);
  const auto g = CommGraph::complete(3);
  EXPECT_EQ(dgba::dgba_communication_phase(agents, g, true, 3), 6);
  // Every self entry changed (f became 1), so each is sent once more.
  EXPECT_EQ(dgba::dgba_communication_phase(agents, g, true, 3), 6);
  EXPECT_EQ(dgba::dgba_communication_phase(agents, g, true, 3), 0);
}

TEST(CommunicationPhase, RejectsBadGraphs) {
  auto agents = runtimes(2);
  CommGraph g(2);
  g.set(0, 1, 1.0);
  EXPECT_THROW(dgba::dgba_communication_phase(agents, g, true, 2), dgba::ContractViolation);
  EXPECT_THROW(dgba::dgba_communication_phase(agents, CommGraph(3), true, 2),
               dgba::ConfigurationError);
}

TEST(DgbaRun, SingleAgentSingleTarget) {
  const dgba::ObservationOracle probe(std::vector<std::vector<double>>{{ref::frozen::kSurvival08}},
                                      std::vector<double>{2.0});
  const auto o = std::make_shared<dgba::ObservationOracle>(probe);
  const auto run = dgba::dgba_run(o, exclusive(1, 1), CommGraph(1));
  EXPECT_EQ(run.result.policy, (AllocationPolicy{{0, 0}}));
  EXPECT_NEAR(run.result.utility, ref::frozen::kSingleGain, 1e-12);
}

TEST(DgbaRun, ExclusiveTwoAgentExample) {
  const auto in = support::two_agent_instance();
  const auto run = dgba::dgba_run(observation(in), exclusive(2, 2), CommGraph::complete(2));
  EXPECT_EQ(run.result.policy, (AllocationPolicy{{0, 0}, {1, 1}}));
  EXPECT_NEAR(run.result.utility, ref::frozen::kExclusiveUtility, 1e-12);
  // The swapped matching is better; the greedy answer stays within the
  // curvature bound of it.
  const auto best = ref::optimum(in.p, in.rho, ref::Matrix(2, std::vector<double>(2, 1.0)),
                                 {1.0, 1.0}, true);
  EXPECT_NEAR(best.value, 3.0 * ref::frozen::kSurvival08, 1e-12);
  EXPECT_GE(run.result.utility / best.value, 1.0 / (1.0 + ref::frozen::kTwoAgentKappa));
}

TEST(DgbaRun, SharedTargetsExample) {
  const auto in = support::two_agent_instance();
  const auto run = dgba::dgba_run(observation(in), partition_only(2, 2), CommGraph::complete(2));
  EXPECT_EQ(run.result.policy, (AllocationPolicy{{0, 0}, {1, 0}}));
  EXPECT_NEAR(run.result.utility, ref::frozen::kSharedUtility, 1e-12);
}

TEST(DgbaRun, EmptyGraphKeepsLocalChoices) {
  // Each agent sits next to its own target.
  const dgba::AdditiveOracle probe({{1.0, 0.1, 0.1}, {0.1, 1.0, 0.1}, {0.1, 0.1, 1.0}});
  const auto run = dgba::dgba_run(std::make_shared<dgba::AdditiveOracle>(probe), exclusive(3, 3),
                                  CommGraph(3));
  EXPECT_EQ(run.result.policy, (AllocationPolicy{{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(run.result.messages, 0);
}

TEST(DgbaRun, EmptyGraphConflictsPersistAcrossPartitions) {
  const dgba::AdditiveOracle probe({{1.0, 0.1}, {1.0, 0.1}});
  const auto run = dgba::dgba_run(std::make_shared<dgba::AdditiveOracle>(probe), exclusive(2, 2),
                                  CommGraph(2));
  EXPECT_EQ(run.result.policy, (AllocationPolicy{{0, 0}, {1, 0}}));
  std::set<int> agents;
  for (const auto& e : run.result.policy) EXPECT_TRUE(agents.insert(e.agent).second);
}

TEST(DgbaRun, RejectsDimensionMismatch) {
  const auto in = support::two_agent_instance();
  EXPECT_THROW(dgba::dgba_run(observation(in), exclusive(3, 2), CommGraph::complete(2)),
               dgba::ConfigurationError);
  EXPECT_THROW(dgba::dgba_run(observation(in), exclusive(2, 2), CommGraph::complete(3)),
               dgba::ConfigurationError);
}

TEST(DgbaRun, DeterministicAcrossRuns) {
  std::mt19937_64 rng(61);
  const auto in = support::random_instance(rng, 4, 4);
  const auto a = dgba::dgba_run(observation(in), exclusive(4, 4), CommGraph::star(4));
  const auto b = dgba::dgba_run(observation(in), exclusive(4, 4), CommGraph::star(4));
  EXPECT_EQ(a.result.policy, b.result.policy);
  EXPECT_EQ(a.result.utility, b.result.utility);
  EXPECT_EQ(a.result.messages, b.result.messages);
  EXPECT_EQ(a.result.rounds, b.result.rounds);
  ASSERT_EQ(a.result.series.size(), b.result.series.size());
  for (std::size_t k = 0; k < a.result.series.size(); ++k)
    EXPECT_EQ(a.result.series[k].utility, b.result.series[k].utility);
}

TEST(DgbaRun, ConflictFreeOnCompleteGraphs) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto in = support::random_instance(rng, n, m);
    const auto sys = exclusive(n, m);
    const auto run = dgba::dgba_run(observation(in), sys, CommGraph::complete(n));
    std::set<int> agents, targets;
    for (const auto& e : run.result.policy) {
      ASSERT_TRUE(agents.insert(e.agent).second) << "trial " << trial;
      ASSERT_TRUE(targets.insert(e.target).second) << "trial " << trial;
    }
    ASSERT_TRUE(sys->accepts(run.result.policy));
    // Every agent is used while targets remain.
    ASSERT_EQ(static_cast<int>(run.result.policy.size()), std::min(n, m)) << "trial " << trial;
  }
}

TEST(DgbaRun, NeighboursNeverShareATargetOnConnectedGraphs) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto in = support::random_instance(rng, n, m);
    const auto g = random_connected_graph(rng, n, 0.3);
    const auto run = dgba::dgba_run(observation(in), exclusive(n, m), g);
    std::vector<int> target_of(static_cast<std::size_t>(n), kNoTarget);
    std::set<int> agents;
    for (const auto& e : run.result.policy) {
      ASSERT_TRUE(agents.insert(e.agent).second) << "trial " << trial;
      target_of[e.agent] = e.target;
    }
    for (int i = 0; i < n; ++i)
      for (int k : g.neighbors(i)) {
        if (target_of[i] == kNoTarget) continue;
        ASSERT_NE(target_of[i], target_of[k]) << "trial " << trial;
      }
  }
}

TEST(DgbaRun, HoldersTwoHopsApartBothKeepTheTarget) {
  // Path 0 - 1 - 2 with agents 0 and 2 preferring target 0. Entries travel
  // one hop per exchange, so the ends never see each other's bid.
  const dgba::AdditiveOracle probe({{1.0, 0.1}, {0.2, 0.5}, {0.9, 0.1}});
  CommGraph path(3);
  path.connect(0, 1);
  path.connect(1, 2);
  const auto run = dgba::dgba_run(std::make_shared<dgba::AdditiveOracle>(probe), exclusive(3, 2),
                                  path);
  EXPECT_EQ(run.result.policy, (AllocationPolicy{{0, 0}, {1, 1}, {2, 0}}));
}

TEST(DgbaRun, TracePropertiesHoldOnCompleteGraphs) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto in = support::random_instance(rng, n, m);
    const auto sys = (trial % 2) ? exclusive(n, m) : partition_only(n, m);
    const auto run = dgba::dgba_run(observation(in), sys, CommGraph::complete(n));
    const auto rep = dgba::check_trace(run.trace);
    ASSERT_TRUE(rep.ok()) << "trial " << trial << " round " << rep.first_bad_round;
    ASSERT_TRUE(rep.monotone) << "trial " << trial;
    ASSERT_FALSE(run.trace.empty());
    EXPECT_NEAR(run.trace.back().committed_utility, run.result.utility, 1e-12);
  }
}

TEST(DgbaRun, DecisionsStayDisjointOnConnectedGraphs) {
  std::mt19937_64 rng(68);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto in = support::random_instance(rng, n, m);
    const auto run = dgba::dgba_run(observation(in), exclusive(n, m),
                                    random_connected_graph(rng, n, 0.2));
    const auto rep = dgba::check_trace(run.trace);
    ASSERT_TRUE(rep.disjoint) << "trial " << trial;
    ASSERT_TRUE(rep.union_matches) << "trial " << trial;
    ASSERT_TRUE(rep.monotone) << "trial " << trial;
  }
}

TEST(DgbaRun, TraceCheckFlagsBrokenTraces) {
  std::vector<dgba::RoundRecord> trace(2);
  trace[0].decided = {0};
  trace[1].decided = {0};
  trace[1].committed = AllocationPolicy{{0, 0}};
  EXPECT_FALSE(dgba::check_trace(trace).disjoint);
  trace[1].decided = {};
  trace[1].increment = 0.5;
  EXPECT_FALSE(dgba::check_trace(trace).ok());
}

TEST(SequentialGreedy, EmptyGround) {
  const auto in = support::two_agent_instance();
  const auto r = dgba::sequential_greedy(*observation(in), *partition_only(2, 2), {});
  EXPECT_TRUE(r.policy.empty());
  EXPECT_EQ(r.utility, 0.0);
}

TEST(SequentialGreedy, SharedTargetsExample) {
  const auto in = support::two_agent_instance();
  const auto r = dgba::sequential_greedy(*observation(in), *partition_only(2, 2),
                                         dgba::full_ground_set(2, 2));
  EXPECT_EQ(r.policy, (AllocationPolicy{{0, 0}, {1, 0}}));
  EXPECT_NEAR(r.utility, ref::frozen::kSharedUtility, 1e-12);
  EXPECT_EQ(r.rounds, 2);
}

TEST(SequentialGreedy, ModularOracleIsOptimal) {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4), m = 1 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> weights(n, std::vector<double>(m));
    for (auto& row : weights)
      for (double& x : row) x = w(rng);
    const dgba::AdditiveOracle o(weights);
    const auto greedy = dgba::sequential_greedy(o, *partition_only(n, m), dgba::full_ground_set(n, m));
    const auto exact = dgba::exact_oracle(o, *partition_only(n, m), n, m);
    EXPECT_NEAR(greedy.utility, exact.utility, 1e-12);
  }
}

TEST(ExactOracle, SharedTargetsExample) {
  const auto in = support::two_agent_instance();
  const auto r = dgba::exact_oracle(*observation(in), *partition_only(2, 2), 2, 2);
  EXPECT_EQ(r.policy, (AllocationPolicy{{0, 0}, {1, 0}}));
  EXPECT_NEAR(r.utility, ref::frozen::kSharedUtility, 1e-12);
  EXPECT_EQ(r.rounds, 9);
}

TEST(ExactOracle, SingleAgentTakesBestPair) {
  const dgba::AdditiveOracle o({{0.2, 0.9, 0.4}});
  const auto r = dgba::exact_oracle(o, *partition_only(1, 3), 1, 3);
  EXPECT_EQ(r.policy, (AllocationPolicy{{0, 1}}));
}

TEST(ExactOracle, ZeroOracleGivesEmptyPolicy) {
  const dgba::AdditiveOracle o({{0.0, 0.0}, {0.0, 0.0}});
  const auto r = dgba::exact_oracle(o, *partition_only(2, 2), 2, 2);
  EXPECT_TRUE(r.policy.empty());
  EXPECT_EQ(r.utility, 0.0);
}

TEST(ExactOracle, RejectsOversizedSearch) {
  const dgba::AdditiveOracle o(std::vector<std::vector<double>>(8, std::vector<double>(9, 1.0)));
  EXPECT_THROW(dgba::exact_oracle(o, *partition_only(8, 9), 8, 9), dgba::SizeError);
}

TEST(ExactOracle, MatchesReferenceEnumeration) {
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> c(0.2, 2.0), e(0.3, 2.5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto [n, m] = support::random_size(rng, 12);
    const auto in = support::random_instance(rng, n, m);
    ref::Matrix cost(n, std::vector<double>(m));
    dgba::CostTable table(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) table(i, j) = cost[i][j] = c(rng);
    std::vector<double> budgets;
    for (int i = 0; i < n; ++i) budgets.push_back(e(rng));
    const bool excl = trial % 2;
    dgba::ConstraintIntersection sys(n, m);
    sys.add(std::make_shared<dgba::PartitionConstraint>(n, m));
    if (excl) sys.add(std::make_shared<dgba::TargetExclusiveConstraint>(n, m));
    sys.add(std::make_shared<dgba::BudgetConstraint>(budgets, table));
    const auto r = dgba::exact_oracle(*observation(in), sys, n, m);
    EXPECT_NEAR(r.utility, ref::optimum(in.p, in.rho, cost, budgets, excl).value, 1e-12)
        << "trial " << trial;
  }
}

TEST(Auction, SingleAgentMatchesDgba) {
  const dgba::AdditiveOracle probe({{0.2, 0.9, 0.4}});
  const auto o = std::make_shared<dgba::AdditiveOracle>(probe);
  dgba::StaticWorld world(o, exclusive(1, 3), CommGraph(1));
  const auto auction = dgba::auction_baseline(world);
  const auto run = dgba::dgba_run(o, exclusive(1, 3), CommGraph(1));
  EXPECT_EQ(auction.policy, run.result.policy);
  EXPECT_EQ(auction.utility, run.result.utility);
}

TEST(Auction, ExclusiveTwoAgentExample) {
  const auto in = support::two_agent_instance();
  dgba::StaticWorld world(observation(in), exclusive(2, 2), CommGraph::complete(2));
  const auto r = dgba::auction_baseline(world);
  EXPECT_EQ(r.policy, (AllocationPolicy{{0, 0}, {1, 1}}));
  EXPECT_NEAR(r.utility, ref::frozen::kExclusiveUtility, 1e-12);
  EXPECT_GT(r.messages, 0);
}

TEST(Auction, StarNeedsMoreRoundsThanComplete) {
  // Three agents bid for one target; a leaf's bid reaches the other leaves
  // only through the centre.
  const dgba::AdditiveOracle probe({{0.5}, {0.7}, {0.9}});
  const auto o = std::make_shared<dgba::AdditiveOracle>(probe);
  dgba::StaticWorld complete(o, exclusive(3, 1), CommGraph::complete(3));
  dgba::StaticWorld star(o, exclusive(3, 1), CommGraph::star(3, 0));
  const auto rc = dgba::auction_baseline(complete);
  const auto rs = dgba::auction_baseline(star);
  EXPECT_EQ(rc.policy, (AllocationPolicy{{2, 0}}));
  EXPECT_EQ(rs.policy, (AllocationPolicy{{2, 0}}));
  EXPECT_GT(rs.rounds, rc.rounds);
}

TEST(Auction, ConflictFreeOnConnectedGraphs) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto in = support::random_instance(rng, n, m);
    dgba::StaticWorld world(observation(in), exclusive(n, m), random_connected_graph(rng, n, 0.3));
    const auto r = dgba::auction_baseline(world);
    std::set<int> agents, targets;
    for (const auto& e : r.policy) {
      ASSERT_TRUE(agents.insert(e.agent).second) << "trial " << trial;
      ASSERT_TRUE(targets.insert(e.target).second) << "trial " << trial;
    }
  }
}

TEST(StaticWorldCosts, LockedTargetsAccrueTheirCost) {
  const auto in = support::two_agent_instance();
  dgba::StaticWorld world(observation(in), exclusive(2, 2), CommGraph::complete(2),
                          dgba::CostTable{{0.5, 0.7}, {0.9, 1.1}});
  const auto run = dgba::dgba_run(world);
  ASSERT_EQ(run.result.per_agent_cost.size(), 2u);
  EXPECT_DOUBLE_EQ(run.result.per_agent_cost[0], 0.5);
  EXPECT_DOUBLE_EQ(run.result.per_agent_cost[1], 1.1);
}

}  // namespace

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

// Random instances shared by the unit tests and the acceptance binary.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dgba/common.hpp"
#include "dgba/satellite.hpp"
#include "oracles.hpp"

namespace support {

/// Observation instance with both library and reference views of it.
struct Instance {
  int n = 0;
  int m = 0;
  std::vector<dgba::AgentState> agents;
  std::vector<dgba::TargetState> targets;
  ref::Matrix p;
  std::vector<double> rho;
};

/// Agents and targets uniform in [0, box]^3, rho in [2, 2.5].
inline Instance random_instance(std::mt19937_64& rng, int n, int m, double lambda = 0.8,
                                double box = 3.0) {
  std::uniform_real_distribution<double> pos(0.0, box), rho(2.0, 2.5);
  Instance in;
  in.n = n;
  in.m = m;
  std::vector<std::array<double, 3>> ap, tp;
  for (int i = 0; i < n; ++i) {
    dgba::AgentState a;
    for (int d = 0; d < 3; ++d) a.position[d] = pos(rng);
    ap.push_back({a.position[0], a.position[1], a.position[2]});
    in.agents.push_back(a);
  }
  for (int j = 0; j < m; ++j) {
    dgba::TargetState t;
    for (int d = 0; d < 3; ++d) t.position[d] = pos(rng);
    t.info_value = rho(rng);
    t.decay = lambda;
    tp.push_back({t.position[0], t.position[1], t.position[2]});
    in.rho.push_back(t.info_value);
    in.targets.push_back(t);
  }
  in.p = ref::survival_matrix(ap, tp, std::vector<double>(static_cast<std::size_t>(m), lambda));
  return in;
}

/// Size with N * M <= max_ground, both at least 1.
inline std::pair<int, int> random_size(std::mt19937_64& rng, int max_ground) {
  for (;;) {
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    const int m = std::uniform_int_distribution<int>(1, 4)(rng);
    if (n * m <= max_ground) return {n, m};
  }
}

inline dgba::AllocationPolicy to_policy(const std::vector<ref::Pair>& s) {
  dgba::AllocationPolicy p;
  for (const auto& [a, t] : s) p.insert({a, t});
  return p;
}

inline std::vector<ref::Pair> to_pairs(const dgba::AllocationPolicy& p) {
  std::vector<ref::Pair> out;
  for (const auto& e : p) out.emplace_back(e.agent, e.target);
  return out;
}

/// Uniformly random mask over `bits` bits.
inline std::uint64_t random_mask(std::mt19937_64& rng, std::size_t bits) {
  return bits == 0 ? 0 : rng() & ((std::uint64_t{1} << bits) - 1);
}

/// The two-agent, two-target layout used across the tests: agent 0 is at
/// unit distance from both targets, agent 1 at unit distance from target 0
/// and distance 2 from target 1; rho = (2, 1), lambda = 0.8.
inline Instance two_agent_instance() {
  Instance in;
  in.n = 2;
  in.m = 2;
  dgba::AgentState a0, a1;
  a0.position = dgba::Vec3(0.0, 0.0, 0.0);
  a1.position = dgba::Vec3(2.0, 0.0, 0.0);
  dgba::TargetState t0, t1;
  t0.position = dgba::Vec3(1.0, 0.0, 0.0);
  t1.position = dgba::Vec3(0.25, std::sqrt(15.0) / 4.0, 0.0);
  t0.info_value = 2.0;
  t1.info_value = 1.0;
  t0.decay = t1.decay = 0.8;
  in.agents = {a0, a1};
  in.targets = {t0, t1};
  in.rho = {2.0, 1.0};
  in.p = ref::survival_matrix({{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}},
                              {{1.0, 0.0, 0.0}, {0.25, std::sqrt(15.0) / 4.0, 0.0}}, {0.8, 0.8});
  return in;
}

}  // namespace support

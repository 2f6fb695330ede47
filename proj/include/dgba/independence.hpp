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

// Hereditary independence systems over I x J: the per-agent partition
// constraint, per-agent fuel budgets, one-agent-per-target exclusivity,
// their intersection, the cost-ratio q estimate and an exhaustive
// q-independence verifier.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "dgba/common.hpp"

namespace dgba {

/// Row-major N x M table of per-pair costs.
class CostTable {
 public:
  CostTable() = default;
  CostTable(int n_agents, int n_targets, double fill = 0.0)
      : n_agents_(n_agents), n_targets_(n_targets),
        data_(static_cast<std::size_t>(n_agents) * n_targets, fill) {}
  CostTable(std::initializer_list<std::initializer_list<double>> rows) {
    n_agents_ = static_cast<int>(rows.size());
    n_targets_ = rows.size() ? static_cast<int>(rows.begin()->size()) : 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n_targets_)
        throw ConfigurationError("CostTable: ragged rows");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  int n_agents() const { return n_agents_; }
  int n_targets() const { return n_targets_; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_targets_ + j]; }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * n_targets_ + j];
  }
  const std::vector<double>& values() const { return data_; }

 private:
  int n_agents_ = 0;
  int n_targets_ = 0;
  std::vector<double> data_;
};

/// (Omega, S): a hereditary family of feasible allocation policies.
class IndependenceSystem {
 public:
  virtual ~IndependenceSystem() = default;

  virtual int n_agents() const = 0;
  virtual int n_targets() const = 0;

  /// Membership test; callers guarantee elements are in range.
  virtual bool accepts(const AllocationPolicy& policy) const = 0;

  /// out[j] = 1 iff base + (agent, j) is independent. The default is one
  /// membership test per target; concrete constraints answer in O(|base| + M).
  virtual void feasible_targets(const AllocationPolicy& base, int agent,
                                std::vector<char>& out) const {
    out.assign(static_cast<std::size_t>(n_targets()), 0);
    for (int j = 0; j < n_targets(); ++j) out[j] = accepts(base.with({agent, j})) ? 1 : 0;
  }
};

/// True iff every composed constraint accepts the policy.
inline bool is_independent(const IndependenceSystem& system, const AllocationPolicy& policy) {
  check_bounds(policy, system.n_agents(), system.n_targets());
  return system.accepts(policy);
}

/// |P cap Omega_i| <= 1: each agent holds at most one target.
class PartitionConstraint final : public IndependenceSystem {
 public:
  PartitionConstraint(int n_agents, int n_targets) : n_agents_(n_agents), n_targets_(n_targets) {}

  int n_agents() const override { return n_agents_; }
  int n_targets() const override { return n_targets_; }

  bool accepts(const AllocationPolicy& policy) const override {
    // Sorted by agent first, so duplicates are adjacent.
    int prev = -1;
    for (const auto& e : policy) {
      if (e.agent == prev) return false;
      prev = e.agent;
    }
    return true;
  }

  void feasible_targets(const AllocationPolicy& base, int agent,
                        std::vector<char>& out) const override {
    out.assign(static_cast<std::size_t>(n_targets_), 0);
    if (!accepts(base)) return;
    const auto held = std::find_if(base.begin(), base.end(),
                                   [&](const auto& e) { return e.agent == agent; });
    if (held == base.end()) {
      std::fill(out.begin(), out.end(), 1);
    } else {
      out[held->target] = 1;  // re-adding the held element is a no-op
    }
  }

 private:
  int n_agents_;
  int n_targets_;
};

/// Each target is held by at most one agent.
class TargetExclusiveConstraint final : public IndependenceSystem {
 public:
  TargetExclusiveConstraint(int n_agents, int n_targets)
      : n_agents_(n_agents), n_targets_(n_targets) {}

  int n_agents() const override { return n_agents_; }
  int n_targets() const override { return n_targets_; }

  bool accepts(const AllocationPolicy& policy) const override {
    std::vector<char> seen(static_cast<std::size_t>(n_targets_), 0);
    for (const auto& e : policy) {
      if (seen[e.target]) return false;
      seen[e.target] = 1;
    }
    return true;
  }

  void feasible_targets(const AllocationPolicy& base, int agent,
                        std::vector<char>& out) const override {
    out.assign(static_cast<std::size_t>(n_targets_), 1);
    bool base_ok = true;
    for (const auto& e : base) {
      if (!out[e.target]) base_ok = false;
      out[e.target] = 0;
    }
    if (!base_ok) {
      std::fill(out.begin(), out.end(), 0);
      return;
    }
    for (const auto& e : base)
      if (e.agent == agent) out[e.target] = 1;  // re-adding the held element is a no-op
  }

 private:
  int n_agents_;
  int n_targets_;
};

/// sum_{(i,j) in P} C(i,j) <= E_i for every agent i.
class BudgetConstraint final : public IndependenceSystem {
 public:
  BudgetConstraint(std::vector<double> budgets, CostTable costs)
      : budgets_(std::move(budgets)), costs_(std::move(costs)) {
    if (static_cast<int>(budgets_.size()) != costs_.n_agents())
      throw ConfigurationError("BudgetConstraint: budgets and cost table disagree on N");
    for (double e : budgets_)
      if (!(e >= 0.0)) throw DomainError("BudgetConstraint: budgets must be >= 0");
    for (double c : costs_.values())
      if (!(c > 0.0)) throw DomainError("BudgetConstraint: costs must be > 0");
  }

  int n_agents() const override { return costs_.n_agents(); }
  int n_targets() const override { return costs_.n_targets(); }
  const std::vector<double>& budgets() const { return budgets_; }
  const CostTable& costs() const { return costs_; }

  bool accepts(const AllocationPolicy& policy) const override {
    std::vector<double> spent(budgets_.size(), 0.0);
    for (const auto& e : policy) spent[e.agent] += costs_(e.agent, e.target);
    for (std::size_t i = 0; i < spent.size(); ++i)
      if (spent[i] > budgets_[i]) return false;
    return true;
  }

  void feasible_targets(const AllocationPolicy& base, int agent,
                        std::vector<char>& out) const override {
    out.assign(static_cast<std::size_t>(n_targets()), 0);
    if (!accepts(base)) return;
    double spent = 0.0;
    for (const auto& e : base)
      if (e.agent == agent) spent += costs_(e.agent, e.target);
    for (int j = 0; j < n_targets(); ++j) {
      if (base.contains({agent, j})) {
        out[j] = 1;  // already present: adding it changes nothing
        continue;
      }
      out[j] = spent + costs_(agent, j) <= budgets_[agent] ? 1 : 0;
    }
  }

 private:
  std::vector<double> budgets_;
  CostTable costs_;
};

/// Conjunction of independence systems; hereditary because each part is.
class ConstraintIntersection final : public IndependenceSystem {
 public:
  using Part = std::shared_ptr<const IndependenceSystem>;

  ConstraintIntersection(int n_agents, int n_targets, std::vector<Part> parts = {})
      : n_agents_(n_agents), n_targets_(n_targets), parts_(std::move(parts)) {
    for (const auto& p : parts_) check_part(*p);
  }

  ConstraintIntersection& add(Part part) {
    check_part(*part);
    parts_.push_back(std::move(part));
    return *this;
  }

  int n_agents() const override { return n_agents_; }
  int n_targets() const override { return n_targets_; }
  const std::vector<Part>& parts() const { return parts_; }

  bool accepts(const AllocationPolicy& policy) const override {
    return std::all_of(parts_.begin(), parts_.end(),
                       [&](const Part& p) { return p->accepts(policy); });
  }

  void feasible_targets(const AllocationPolicy& base, int agent,
                        std::vector<char>& out) const override {
    out.assign(static_cast<std::size_t>(n_targets_), 1);
    std::vector<char> part_out;
    for (const auto& p : parts_) {
      p->feasible_targets(base, agent, part_out);
      for (int j = 0; j < n_targets_; ++j) out[j] = static_cast<char>(out[j] && part_out[j]);
    }
  }

  /// First budget constraint among the parts, if any.
  const BudgetConstraint* budget() const {
    for (const auto& p : parts_)
      if (auto b = dynamic_cast<const BudgetConstraint*>(p.get())) return b;
    return nullptr;
  }

 private:
  void check_part(const IndependenceSystem& p) const {
    if (p.n_agents() != n_agents_ || p.n_targets() != n_targets_)
      throw ConfigurationError("ConstraintIntersection: part dimensions differ");
  }

  int n_agents_;
  int n_targets_;
  std::vector<Part> parts_;
};

// ---------------------------------------------------------------------------
// q estimate

struct QEstimate {
  double q = 2.0;
  double c_max = 0.0;
  double c_min = 0.0;
  GroundElement argmax{};
  GroundElement argmin{};
};

/// q = ceil(1 + C_max / C_min) over every pair of the cost table.
inline QEstimate estimate_q(const CostTable& costs) {
  if (costs.n_agents() == 0 || costs.n_targets() == 0)
    throw DomainError("estimate_q: empty cost table");
  QEstimate out;
  out.c_max = -1.0;
  out.c_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < costs.n_agents(); ++i) {
    for (int j = 0; j < costs.n_targets(); ++j) {
      const double c = costs(i, j);
      if (!(c > 0.0)) {
        std::ostringstream os;
        os << "estimate_q: cost of (" << i << ',' << j << ") is " << c << ", must be > 0";
        throw DomainError(os.str());
      }
      if (c > out.c_max) { out.c_max = c; out.argmax = {i, j}; }
      if (c < out.c_min) { out.c_min = c; out.argmin = {i, j}; }
    }
  }
  out.q = std::ceil(1.0 + out.c_max / out.c_min);
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive q-independence check

struct QVerification {
  bool passed = true;
  double worst_ratio = 0.0;
  AllocationPolicy witness_subset;
  AllocationPolicy witness_largest;
  AllocationPolicy witness_smallest;
  std::uint64_t subsets_checked = 0;
};

inline constexpr std::size_t kDefaultQVerifyCap = 10;

/// For every P subset of `ground`, enumerates the maximal independent subsets
/// B(P) and checks max |P1| / |P2| <= q_claim.
inline QVerification verify_q_property(const IndependenceSystem& system,
                                       const std::vector<GroundElement>& ground, double q_claim,
                                       std::size_t cap = kDefaultQVerifyCap) {
  if (ground.size() > cap || ground.size() > 20) {
    std::ostringstream os;
    os << "verify_q_property: " << ground.size() << " ground elements exceed cap " << cap;
    throw SizeError(os.str());
  }
  {
    AllocationPolicy all(ground.begin(), ground.end());
    if (all.size() != ground.size()) throw ContractViolation("verify_q_property: duplicate elements");
    check_bounds(all, system.n_agents(), system.n_targets());
  }
  const std::size_t n = ground.size();
  const std::uint64_t n_masks = std::uint64_t{1} << n;

  // Membership memo. Extension is depth-first over increasing masks: a mask
  // is only tested when dropping its highest bit leaves an independent set,
  // which the hereditary property makes exact.
  std::vector<char> indep(n_masks, 0);
  indep[0] = system.accepts(AllocationPolicy{}) ? 1 : 0;
  for (std::uint64_t mask = 1; mask < n_masks; ++mask) {
    const std::uint64_t high = std::uint64_t{1} << (63 - std::countl_zero(mask));
    indep[mask] = indep[mask ^ high] && system.accepts(policy_from_mask(ground, mask)) ? 1 : 0;
  }

  QVerification out;
  for (std::uint64_t set = 1; set < n_masks; ++set) {
    int smallest = std::numeric_limits<int>::max(), largest = -1;
    std::uint64_t smallest_mask = 0, largest_mask = 0;
    // Walk every submask of `set`, including the empty one.
    for (std::uint64_t sub = set;; sub = (sub - 1) & set) {
      if (indep[sub]) {
        bool maximal = true;
        for (std::uint64_t rest = set & ~sub; rest; rest &= rest - 1) {
          if (indep[sub | (rest & (~rest + 1))]) {
            maximal = false;
            break;
          }
        }
        if (maximal) {
          const int size = std::popcount(sub);
          if (size < smallest) { smallest = size; smallest_mask = sub; }
          if (size > largest) { largest = size; largest_mask = sub; }
        }
      }
      if (sub == 0) break;
    }
    ++out.subsets_checked;
    if (largest <= 0) continue;  // only the empty basis: ratio undefined
    const double ratio = static_cast<double>(largest) / static_cast<double>(smallest);
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.witness_subset = policy_from_mask(ground, set);
      out.witness_largest = policy_from_mask(ground, largest_mask);
      out.witness_smallest = policy_from_mask(ground, smallest_mask);
    }
  }
  out.passed = out.worst_ratio <= q_claim;
  return out;
}

}  // namespace dgba

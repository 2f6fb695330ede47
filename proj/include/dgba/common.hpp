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

// Shared vocabulary: ground elements, allocation policies and the error
// hierarchy used by every module.
//
// Agent and target indices are zero-based throughout the library.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgba {

/// Marker for "no target" in allocation bundles.
inline constexpr int kNoTarget = -1;

// ---------------------------------------------------------------------------
// Errors

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An exhaustive routine was asked to enumerate more than its cap.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Curvature estimation found no well-defined ratio.
class DegenerateOracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that cannot both be true (e.g. a positive value above a zero optimum).
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oracle, constraint and scenario dimensions disagree.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation state became non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Ground set

/// One (agent, target) pair of the ground set.
struct GroundElement {
  int agent = 0;
  int target = 0;

  friend auto operator<=>(const GroundElement&, const GroundElement&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const GroundElement& e) {
  return os << '(' << e.agent << ',' << e.target << ')';
}

/// Full ground set I x J in lexicographic (agent, target) order.
inline std::vector<GroundElement> full_ground_set(int n_agents, int n_targets) {
  std::vector<GroundElement> ground;
  ground.reserve(static_cast<std::size_t>(n_agents) * n_targets);
  for (int i = 0; i < n_agents; ++i) {
    for (int j = 0; j < n_targets; ++j) ground.push_back({i, j});
  }
  return ground;
}

/// A finite set of ground elements, kept sorted and duplicate-free.
class AllocationPolicy {
 public:
  using const_iterator = std::vector<GroundElement>::const_iterator;

  AllocationPolicy() = default;
  AllocationPolicy(std::initializer_list<GroundElement> elements) {
    for (const auto& e : elements) insert(e);
  }
  template <typename It>
  AllocationPolicy(It first, It last) {
    for (; first != last; ++first) insert(*first);
  }

  /// Returns false when the element was already present.
  bool insert(const GroundElement& e) {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), e);
    if (it != elements_.end() && *it == e) return false;
    elements_.insert(it, e);
    return true;
  }

  bool erase(const GroundElement& e) {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), e);
    if (it == elements_.end() || !(*it == e)) return false;
    elements_.erase(it);
    return true;
  }

  bool contains(const GroundElement& e) const {
    return std::binary_search(elements_.begin(), elements_.end(), e);
  }

  AllocationPolicy with(const GroundElement& e) const {
    AllocationPolicy out = *this;
    out.insert(e);
    return out;
  }

  AllocationPolicy united(const AllocationPolicy& other) const {
    AllocationPolicy out;
    out.elements_.reserve(elements_.size() + other.elements_.size());
    std::set_union(elements_.begin(), elements_.end(), other.elements_.begin(),
                   other.elements_.end(), std::back_inserter(out.elements_));
    return out;
  }

  /// Elements of *this that are not in `other`.
  AllocationPolicy minus(const AllocationPolicy& other) const {
    AllocationPolicy out;
    std::set_difference(elements_.begin(), elements_.end(),
                        other.elements_.begin(), other.elements_.end(),
                        std::back_inserter(out.elements_));
    return out;
  }

  bool is_subset_of(const AllocationPolicy& other) const {
    return std::includes(other.elements_.begin(), other.elements_.end(),
                         elements_.begin(), elements_.end());
  }

  void clear() { elements_.clear(); }
  bool empty() const { return elements_.empty(); }
  std::size_t size() const { return elements_.size(); }
  const_iterator begin() const { return elements_.begin(); }
  const_iterator end() const { return elements_.end(); }
  const std::vector<GroundElement>& elements() const { return elements_; }

  friend bool operator==(const AllocationPolicy&, const AllocationPolicy&) = default;

 private:
  std::vector<GroundElement> elements_;
};

inline std::string to_string(const AllocationPolicy& policy) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& e : policy) {
    if (!first) os << ',';
    os << e;
    first = false;
  }
  os << '}';
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const AllocationPolicy& p) {
  return os << to_string(p);
}

/// Throws ContractViolation unless every element lies in [0,N) x [0,M).
inline void check_bounds(const AllocationPolicy& policy, int n_agents, int n_targets) {
  for (const auto& e : policy) {
    if (e.agent < 0 || e.agent >= n_agents || e.target < 0 || e.target >= n_targets) {
      std::ostringstream os;
      os << "element " << e << " outside ground set " << n_agents << "x" << n_targets;
      throw ContractViolation(os.str());
    }
  }
}

/// Policy built from the elements of `ground` selected by the bits of `mask`.
inline AllocationPolicy policy_from_mask(const std::vector<GroundElement>& ground,
                                         std::uint64_t mask) {
  AllocationPolicy out;
  for (std::size_t k = 0; k < ground.size(); ++k) {
    if (mask & (std::uint64_t{1} << k)) out.insert(ground[k]);
  }
  return out;
}

}  // namespace dgba

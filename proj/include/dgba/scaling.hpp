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

// Per-round cost of the protocol against the model a + b N^2 + c N M.
//
// Every timed round starts from fresh bundles on a complete graph, so all N
// agents bid and all N^2 neighbor entries are exchanged; later rounds of a
// run do less work and would blur the model.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dgba/dgba.hpp"
#include "dgba/independence.hpp"
#include "dgba/satellite.hpp"

namespace dgba {

struct ScalingConfig {
  std::vector<int> agents{5, 10, 20, 40};
  std::vector<int> targets{5, 10, 20, 40};
  int rounds = 50;   // rounds averaged per batch
  int batches = 5;   // the median batch mean is reported
  std::uint64_t seed = 7;
};

struct ScalingPoint {
  int n_agents = 0;
  int n_targets = 0;
  double seconds_per_round = 0.0;
};

struct ScalingFit {
  bool fitted = false;
  double a = 0.0, b = 0.0, c = 0.0;
  double r_squared = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  ScalingFit fit;
};

/// Random static instance with every pair feasible apart from the partition.
inline std::shared_ptr<const ObservationOracle> scaling_oracle(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> p(0.05, 0.95), rho(2.0, 2.5);
  std::vector<std::vector<double>> prob(static_cast<std::size_t>(n));
  for (auto& row : prob)
    for (int j = 0; j < m; ++j) row.push_back(p(rng));
  std::vector<double> info(static_cast<std::size_t>(m));
  for (double& v : info) v = rho(rng);
  return std::make_shared<ObservationOracle>(prob, info);
}

inline double time_round(int n, int m, const ScalingConfig& cfg) {
  auto oracle = scaling_oracle(n, m, derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                                                 static_cast<std::uint64_t>(m)));
  auto constraints = std::make_shared<PartitionConstraint>(n, m);
  std::vector<double> means;
  for (int b = 0; b < cfg.batches; ++b) {
    double total = 0.0;
    for (int r = 0; r < cfg.rounds; ++r) {
      StaticWorld world(oracle, constraints, CommGraph::complete(n), {}, 1);
      total += dgba_run(world, DgbaOptions{false, false}).result.wall_time_s;
    }
    means.push_back(total / cfg.rounds);
  }
  return median(means);
}

/// Ordinary least squares of t on [1, N^2, N M]; needs three distinct rows.
inline ScalingFit fit_scaling(const std::vector<ScalingPoint>& pts) {
  ScalingFit fit;
  const int k = static_cast<int>(pts.size());
  if (k < 3) return fit;
  Eigen::MatrixXd x(k, 3);
  Eigen::VectorXd y(k);
  for (int r = 0; r < k; ++r) {
    const double n = pts[r].n_agents, m = pts[r].n_targets;
    x.row(r) << 1.0, n * n, n * m;
    y[r] = pts[r].seconds_per_round;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 3) return fit;
  const Eigen::VectorXd beta = qr.solve(y);
  const double ss_res = (x * beta - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.fitted = true;
  fit.a = beta[0];
  fit.b = beta[1];
  fit.c = beta[2];
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

inline ScalingReport run_scaling(const ScalingConfig& cfg) {
  if (cfg.agents.empty() || cfg.targets.empty())
    throw ConfigurationError("scaling: empty grid");
  if (cfg.rounds < 1 || cfg.batches < 1)
    throw ConfigurationError("scaling: rounds and batches must be >= 1");
  for (int v : cfg.agents)
    if (v < 1) throw ConfigurationError("scaling: grid sizes must be >= 1");
  for (int v : cfg.targets)
    if (v < 1) throw ConfigurationError("scaling: grid sizes must be >= 1");
  ScalingReport rep;
  for (int n : cfg.agents)
    for (int m : cfg.targets) rep.points.push_back({n, m, time_round(n, m, cfg)});
  rep.fit = fit_scaling(rep.points);
  return rep;
}

}  // namespace dgba

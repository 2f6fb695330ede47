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

// Monte Carlo experiment runner. Every solver of a draw sees the same
// generated scenario; draws run on a small thread pool and are written in
// draw order, so outputs do not depend on scheduling.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgba/baselines.hpp"
#include "dgba/bounds.hpp"
#include "dgba/dgba.hpp"
#include "dgba/satellite.hpp"
#include "dgba/satellite_world.hpp"

namespace dgba {

inline const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names{"dgba", "sequential_greedy", "auction_baseline",
                                              "exact_oracle"};
  return names;
}

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<std::string> solvers{"dgba", "auction_baseline"};
  int n_monte_carlo = 10;
  std::uint64_t seed = 12345;
  /// (N, M) grid; empty means the scenario's own size.
  std::vector<std::pair<int, int>> sizes;
  int threads = 1;
  /// Also report a centered moving average of the per-step mean utility.
  bool moving_average = false;
  int moving_average_window = 201;
  /// Check the structural trace properties on every DGBA run.
  bool check_traces = true;
  /// Ground-set cap for the curvature estimate behind exact-oracle certificates.
  std::size_t curvature_cap = 16;

  std::vector<std::pair<int, int>> effective_sizes() const {
    if (!sizes.empty()) return sizes;
    return {{scenario.n_agents, scenario.n_targets}};
  }
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n_monte_carlo < 1) throw ConfigurationError("experiment: n_monte_carlo must be >= 1");
  if (cfg.threads < 1) throw ConfigurationError("experiment: threads must be >= 1");
  if (cfg.moving_average_window < 1 || cfg.moving_average_window % 2 == 0)
    throw ConfigurationError("experiment: moving_average_window must be a positive odd number");
  if (cfg.solvers.empty()) throw ConfigurationError("experiment: no solvers requested");
  for (const auto& s : cfg.solvers) {
    const auto& k = known_solvers();
    if (std::find(k.begin(), k.end(), s) == k.end())
      throw ConfigurationError("experiment: unknown solver '" + s + "'");
  }
  const bool exact =
      std::find(cfg.solvers.begin(), cfg.solvers.end(), "exact_oracle") != cfg.solvers.end();
  for (const auto& [n, m] : cfg.effective_sizes()) {
    if (n < 1 || m < 1) throw ConfigurationError("experiment: sizes must be >= 1");
    if (exact && std::pow(m + 1.0, n) > kExactOracleCap)
      throw ConfigurationError("experiment: size (" + std::to_string(n) + ", " +
                               std::to_string(m) + ") exceeds the exact-oracle cap");
  }
}

struct DrawInfo {
  /// Global draw index: size_index * n_monte_carlo + local draw.
  int draw = 0;
  int size_index = 0;
  int n_agents = 0;
  int n_targets = 0;
  std::uint64_t seed = 0;
};

/// Exact-oracle certificate: static DGBA against the optimum on the t = 0
/// snapshot, both under partition plus budget.
struct SnapshotCertificate {
  double dgba_utility = 0.0;
  double optimal_utility = 0.0;
  double kappa_e = 0.0;
  bool curvature_degenerate = false;
  double q = 2.0;
  BoundCertificate bounds;
};

struct RunRecord {
  std::string solver;
  DrawInfo info;
  bool ok = false;
  std::string error;
  SolverResult result;
  std::optional<TraceReport> trace;
  std::optional<SnapshotCertificate> certificate;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<DrawInfo> draws;
  /// Sorted by draw, then by the configured solver order.
  std::vector<RunRecord> runs;

  int failures() const {
    return static_cast<int>(std::count_if(runs.begin(), runs.end(),
                                          [](const RunRecord& r) { return !r.ok; }));
  }
  bool all_failed() const { return !runs.empty() && failures() == static_cast<int>(runs.size()); }
};

/// q over the pairs that some budget can afford; unaffordable pairs never
/// enter an independent set.
inline double affordable_q(const CostTable& costs, const std::vector<double>& budgets) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < costs.n_agents(); ++i)
    for (int j = 0; j < costs.n_targets(); ++j)
      if (costs(i, j) <= budgets[i]) {
        lo = std::min(lo, costs(i, j));
        hi = std::max(hi, costs(i, j));
      }
  return hi > 0.0 ? std::ceil(1.0 + hi / lo) : 2.0;
}

inline SnapshotCertificate snapshot_certificate(const StaticSnapshot& snap, const SolverResult& opt,
                                                std::size_t curvature_cap) {
  const int n = snap.oracle->n_agents(), m = snap.oracle->n_targets();
  SnapshotCertificate c;
  c.optimal_utility = opt.utility;
  c.dgba_utility =
      dgba_run(snap.oracle, snap.constraints, CommGraph::complete(n), 0, DgbaOptions{false, false})
          .result.utility;
  try {
    c.kappa_e = estimate_elemental_curvature(*snap.oracle, full_ground_set(n, m), 1e-12,
                                             curvature_cap)
                    .kappa_e;
  } catch (const DegenerateOracleError&) {
    c.kappa_e = 0.0;
    c.curvature_degenerate = true;
  }
  c.q = affordable_q(snap.costs, snap.budgets);
  c.bounds = bound_certificate(c.dgba_utility, c.optimal_utility, c.kappa_e, c.q, n);
  return c;
}

/// The scenario section resized to (n, m). Per-agent lists whose length no
/// longer matches fall back to their first entry.
inline ScenarioConfig scenario_config_for(const ExperimentConfig& cfg, int n, int m) {
  ScenarioConfig sc = cfg.scenario;
  sc.n_agents = n;
  sc.n_targets = m;
  if (sc.phi.size() > 1 && static_cast<int>(sc.phi.size()) != n) sc.phi.resize(1);
  if (!sc.budgets.empty() && static_cast<int>(sc.budgets.size()) != n)
    sc.budgets.assign(static_cast<std::size_t>(n), sc.budgets.front());
  return sc;
}

/// Seed of draw `d` at size index `s`.
inline std::uint64_t draw_seed(std::uint64_t master, int s, int d) {
  return derive_seed(master, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(d));
}

inline std::vector<RunRecord> run_draw(const ExperimentConfig& cfg, const DrawInfo& info) {
  std::vector<RunRecord> out;
  for (const auto& name : cfg.solvers) {
    RunRecord r;
    r.solver = name;
    r.info = info;
    out.push_back(std::move(r));
  }
  std::optional<Scenario> scenario;
  try {
    scenario = generate_scenario(scenario_config_for(cfg, info.n_agents, info.n_targets), info.seed);
  } catch (const std::exception& e) {
    for (auto& r : out) r.error = std::string("scenario generation failed: ") + e.what();
    return out;
  }

  for (auto& r : out) {
    try {
      if (r.solver == "dgba") {
        SatelliteWorld world(*scenario);
        DgbaRun run = dgba_run(world, DgbaOptions{cfg.check_traces, scenario->reallocate});
        if (cfg.check_traces) r.trace = check_trace(run.trace);
        r.result = std::move(run.result);
      } else if (r.solver == "auction_baseline") {
        SatelliteWorld world(*scenario);
        r.result = auction_baseline(world);
      } else {
        const StaticSnapshot snap = static_snapshot(*scenario, scenario->exclusive_targets);
        if (r.solver == "sequential_greedy") {
          r.result = sequential_greedy(*snap.oracle, *snap.constraints,
                                       full_ground_set(info.n_agents, info.n_targets));
        } else {
          // Targets may be shared here: the bound concerns partition plus budget.
          const StaticSnapshot shared = static_snapshot(*scenario, false);
          r.result = exact_oracle(*shared.oracle, *shared.constraints, info.n_agents,
                                  info.n_targets);
          if (static_cast<std::size_t>(info.n_agents * info.n_targets) <= cfg.curvature_cap)
            r.certificate = snapshot_certificate(shared, r.result, cfg.curvature_cap);
        }
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  }
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentResult res;
  res.config = cfg;
  const auto sizes = cfg.effective_sizes();
  for (int s = 0; s < static_cast<int>(sizes.size()); ++s) {
    for (int d = 0; d < cfg.n_monte_carlo; ++d) {
      DrawInfo info;
      info.draw = s * cfg.n_monte_carlo + d;
      info.size_index = s;
      info.n_agents = sizes[s].first;
      info.n_targets = sizes[s].second;
      info.seed = draw_seed(cfg.seed, s, d);
      res.draws.push_back(info);
    }
  }

  std::vector<std::vector<RunRecord>> per_draw(res.draws.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < res.draws.size();)
      per_draw[k] = run_draw(cfg, res.draws[k]);
  };
  const int threads = std::min<int>(cfg.threads, static_cast<int>(res.draws.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& v : per_draw)
    for (auto& r : v) res.runs.push_back(std::move(r));
  return res;
}

// ---------------------------------------------------------------------------
// Aggregation and output

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

/// Mean and population standard deviation, summed in input order.
inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  out.count = static_cast<int>(v.size());
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(v.size()));
  return out;
}

/// Centered moving average; the window shrinks at the ends.
inline std::vector<double> moving_average(const std::vector<double>& v, int window) {
  const int half = window / 2;
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - half), hi = std::min(n - 1, k + half);
    double sum = 0.0;
    for (int t = lo; t <= hi; ++t) sum += v[t];
    out[k] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Successful runs of one solver at one size, in draw order.
inline std::vector<const RunRecord*> select_runs(const ExperimentResult& res,
                                                 const std::string& solver, int size_index) {
  std::vector<const RunRecord*> out;
  for (const auto& r : res.runs)
    if (r.ok && r.solver == solver && r.info.size_index == size_index) out.push_back(&r);
  return out;
}

inline nlohmann::json summarize(const ExperimentResult& res, const nlohmann::json& config_echo) {
  using nlohmann::json;
  const ExperimentConfig& cfg = res.config;
  const auto sizes = cfg.effective_sizes();
  json out;
  out["config"] = config_echo;
  out["seed"] = cfg.seed;

  json draws = json::array();
  for (const auto& d : res.draws)
    draws.push_back({{"draw", d.draw}, {"size_index", d.size_index}, {"N", d.n_agents},
                     {"M", d.n_targets}, {"seed", d.seed}});
  out["draws"] = draws;

  json aggregates = json::array();
  for (int s = 0; s < static_cast<int>(sizes.size()); ++s) {
    for (const auto& solver : cfg.solvers) {
      const auto runs = select_runs(res, solver, s);
      std::vector<double> utility, messages, mpr, rounds, wall, comm, cost;
      std::size_t steps = 0;
      for (const RunRecord* r : runs) {
        const SolverResult& x = r->result;
        utility.push_back(x.utility);
        messages.push_back(static_cast<double>(x.messages));
        mpr.push_back(x.messages_per_round());
        rounds.push_back(static_cast<double>(x.rounds));
        wall.push_back(x.wall_time_s);
        comm.push_back(x.communication_time_s);
        double c = 0.0;
        for (double v : x.per_agent_cost) c += v;
        cost.push_back(c);
        steps = std::max(steps, x.series.size());
      }
      auto ms = [](const std::vector<double>& v) {
        const MeanStd m = mean_std(v);
        return json{{"mean", m.mean}, {"std", m.std}};
      };
      json agg{{"solver", solver},
               {"N", sizes[s].first},
               {"M", sizes[s].second},
               {"successes", runs.size()},
               {"failures", cfg.n_monte_carlo - static_cast<int>(runs.size())},
               {"final_utility", ms(utility)},
               {"messages", ms(messages)},
               {"messages_per_round", ms(mpr)},
               {"rounds", ms(rounds)},
               {"total_cost", ms(cost)},
               {"wall_time_s", ms(wall)},
               {"communication_time_s", ms(comm)}};

      // Per-step statistics over runs that reached the step.
      std::vector<double> mean_series, std_series;
      for (std::size_t k = 0; k < steps; ++k) {
        std::vector<double> at;
        for (const RunRecord* r : runs)
          if (k < r->result.series.size()) at.push_back(r->result.series[k].utility);
        const MeanStd m = mean_std(at);
        mean_series.push_back(m.mean);
        std_series.push_back(m.std);
      }
      agg["step_utility_mean"] = mean_series;
      agg["step_utility_std"] = std_series;
      if (cfg.moving_average)
        agg["step_utility_moving_average"] = moving_average(mean_series, cfg.moving_average_window);
      aggregates.push_back(agg);
    }
  }
  out["aggregates"] = aggregates;

  json certificates = json::array(), traces = json::array(), errors = json::array();
  for (const auto& r : res.runs) {
    if (!r.ok) errors.push_back({{"solver", r.solver}, {"draw", r.info.draw}, {"error", r.error}});
    if (r.certificate) {
      const SnapshotCertificate& c = *r.certificate;
      certificates.push_back({{"draw", r.info.draw},
                              {"dgba_utility", c.dgba_utility},
                              {"optimal_utility", c.optimal_utility},
                              {"ratio", c.bounds.ratio},
                              {"kappa_e", c.kappa_e},
                              {"curvature_degenerate", c.curvature_degenerate},
                              {"q", c.q},
                              {"xi_argument", c.bounds.xi_argument},
                              {"curvature_threshold", c.bounds.curvature_threshold},
                              {"q_threshold", c.bounds.q_threshold},
                              {"meets_half", c.bounds.meets_half},
                              {"meets_curvature", c.bounds.meets_curvature},
                              {"meets_q", c.bounds.meets_q}});
    }
    if (r.trace) {
      traces.push_back({{"draw", r.info.draw},
                        {"disjoint", r.trace->disjoint},
                        {"union_matches", r.trace->union_matches},
                        {"monotone", r.trace->monotone},
                        {"max_increment_error", r.trace->max_increment_error},
                        {"ok", r.trace->ok()}});
    }
  }
  out["certificates"] = certificates;
  out["trace_checks"] = traces;
  out["errors"] = errors;
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

inline std::string series_csv(const ExperimentResult& res) {
  std::string out = "solver,draw,step,utility,messages,cumulative_cost\n";
  for (const auto& r : res.runs) {
    if (!r.ok) continue;
    for (const StepSample& s : r.result.series) {
      out += r.solver;
      out += ',' + std::to_string(r.info.draw) + ',' + std::to_string(s.step) + ',' +
             format_double(s.utility) + ',' + std::to_string(s.messages) + ',' +
             format_double(s.cumulative_cost) + '\n';
    }
  }
  return out;
}

inline std::string sizes_csv(const ExperimentResult& res) {
  std::string out = "solver,N,M,mean_total_cost,mean_wall_time_s\n";
  const auto sizes = res.config.effective_sizes();
  for (int s = 0; s < static_cast<int>(sizes.size()); ++s) {
    for (const auto& solver : res.config.solvers) {
      const auto runs = select_runs(res, solver, s);
      if (runs.empty()) continue;
      std::vector<double> cost, wall;
      for (const RunRecord* r : runs) {
        double c = 0.0;
        for (double v : r->result.per_agent_cost) c += v;
        cost.push_back(c);
        wall.push_back(r->result.wall_time_s);
      }
      out += solver + ',' + std::to_string(sizes[s].first) + ',' + std::to_string(sizes[s].second) +
             ',' + format_double(mean_std(cost).mean) + ',' + format_double(mean_std(wall).mean) +
             '\n';
    }
  }
  return out;
}

/// Writes summary.json, series.csv and sizes.csv into `dir`.
inline void write_outputs(const ExperimentResult& res, const nlohmann::json& config_echo,
                          const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "series.csv", series_csv(res));
  write_text(dir / "sizes.csv", sizes_csv(res));
  write_text(dir / "summary.json", summarize(res, config_echo).dump(2) + '\n');
}

}  // namespace dgba

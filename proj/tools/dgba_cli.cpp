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

// dgba: run experiments, verify approximation bounds, dump protocol traces
// and measure per-round scaling.
//
// Exit codes: 0 success, 1 bound violation, 2 configuration error,
// 3 runtime error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dgba/bounds.hpp"
#include "dgba/config.hpp"
#include "dgba/dgba.hpp"
#include "dgba/harness.hpp"
#include "dgba/satellite_world.hpp"
#include "dgba/scaling.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBoundViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a configuration key, e.g. scenario.lambda=0.8");
  cmd->add_option("--seed", o.seed, "Override the master seed");
}

nlohmann::json load(const CommonOptions& o, dgba::AppConfig& cfg, const char* seed_key) {
  std::vector<std::string> overrides = o.overrides;
  if (o.seed) overrides.push_back(std::string(seed_key) + '=' + std::to_string(*o.seed));
  return dgba::load_config(o.config, overrides, cfg);
}

int cmd_run(const CommonOptions& o, const std::string& out_dir) {
  dgba::AppConfig cfg;
  const nlohmann::json echo = load(o, cfg, "experiment.seed");
  const dgba::ExperimentResult res = dgba::run_experiment(cfg.experiment);
  for (const auto& r : res.runs)
    if (!r.ok)
      std::cerr << "draw " << r.info.draw << " " << r.solver << " failed: " << r.error << '\n';
  dgba::write_outputs(res, echo, out_dir);
  std::cout << "wrote " << out_dir << "/{summary.json,series.csv,sizes.csv} (" << res.runs.size()
            << " runs, " << res.failures() << " failed)\n";
  return res.all_failed() ? kExitRuntime : kExitOk;
}

int cmd_verify_bounds(const CommonOptions& o) {
  dgba::AppConfig cfg;
  load(o, cfg, "bounds.seed");
  const dgba::BoundSuiteReport rep = dgba::run_bound_suite(cfg.bounds);
  const int n = rep.total();
  std::printf("instances: %d (N, M <= %d, %d), %.2f s\n", n, cfg.bounds.max_agents,
              cfg.bounds.max_targets, rep.seconds);
  std::printf("ratio >= 1/2:                          %d/%d\n", rep.half_passes, n);
  std::printf("ratio >= 1/(1+kappa_e):                %d/%d\n", rep.curvature_passes, n);
  std::printf("ratio >= 1/(1+kappa_e*xi(ceil((1-1/q)N))): %d/%d\n", rep.q_passes, n);
  std::printf("worst ratio: %.12f (instance seed %llu)\n", rep.worst_ratio,
              static_cast<unsigned long long>(rep.worst_seed));
  std::printf("worst margin over 1/(1+kappa_e): %.3e, over the q bound: %.3e\n",
              rep.worst_curvature_margin, rep.worst_q_margin);
  if (rep.all_pass()) return kExitOk;
  for (const auto& r : rep.instances)
    if (!r.certificate.all())
      std::fprintf(stderr, "violation: instance seed %llu (N=%d, M=%d) ratio %.12f\n",
                   static_cast<unsigned long long>(r.seed), r.n_agents, r.n_targets,
                   r.certificate.ratio);
  return kExitBoundViolation;
}

nlohmann::json round_json(const dgba::RoundRecord& rec) {
  auto policy = [](const dgba::AllocationPolicy& p) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : p) a.push_back({e.agent, e.target});
    return a;
  };
  std::vector<int> f(rec.f.begin(), rec.f.end());
  return {{"round", rec.round},         {"time", rec.time},
          {"committed", policy(rec.committed)},
          {"current", policy(rec.current)},
          {"w", rec.w},                 {"b", rec.b},
          {"f", f},                     {"decided", rec.decided},
          {"increment", rec.increment}, {"increment_terms", rec.increment_terms},
          {"committed_utility", rec.committed_utility},
          {"utility", rec.utility},     {"messages", rec.messages},
          {"cumulative_cost", rec.cumulative_cost}};
}

int cmd_trace(const CommonOptions& o, int draw, const std::string& out_path) {
  dgba::AppConfig cfg;
  load(o, cfg, "experiment.seed");
  if (draw < 0) throw dgba::ConfigurationError("trace: draw must be >= 0");
  const auto [n, m] = cfg.experiment.effective_sizes().front();
  const dgba::Scenario s =
      dgba::generate_scenario(dgba::scenario_config_for(cfg.experiment, n, m),
                              dgba::draw_seed(cfg.experiment.seed, 0, draw));
  dgba::SatelliteWorld world(s);
  const dgba::DgbaRun run = dgba::dgba_run(world, dgba::DgbaOptions{true, s.reallocate});

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  for (const auto& rec : run.trace) os << round_json(rec).dump() << '\n';
  const dgba::TraceReport t = dgba::check_trace(run.trace);
  std::fprintf(stderr, "rounds %zu, utility %.6f, messages %lld, trace %s (max increment error %.2e)\n",
               run.trace.size(), run.result.utility, run.result.messages, t.ok() ? "ok" : "FAILED",
               t.max_increment_error);
  return t.ok() ? kExitOk : kExitBoundViolation;
}

int cmd_scaling(const CommonOptions& o) {
  dgba::AppConfig cfg;
  load(o, cfg, "scaling.seed");
  const dgba::ScalingReport rep = dgba::run_scaling(cfg.scaling);
  std::printf("%6s %6s %16s\n", "N", "M", "s_per_round");
  for (const auto& p : rep.points)
    std::printf("%6d %6d %16.6e\n", p.n_agents, p.n_targets, p.seconds_per_round);
  if (!rep.fit.fitted) {
    std::printf("fit: not enough distinct sizes\n");
  } else {
    std::printf("fit: t = %.4e + %.4e N^2 + %.4e N M, R^2 = %.4f\n", rep.fit.a, rep.fit.b,
                rep.fit.c, rep.fit.r_squared);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed greedy bundles: experiments, bound checks, traces, scaling"};
  app.require_subcommand(1);

  CommonOptions run_opts, bounds_opts, trace_opts, scaling_opts;
  std::string out_dir = "out";
  std::string trace_out;
  int trace_draw = 0;

  auto* run = app.add_subcommand("run", "Run the Monte Carlo experiment and write outputs");
  add_common(run, run_opts);
  run->add_option("-o,--out", out_dir, "Output directory");

  auto* verify = app.add_subcommand("verify-bounds", "Check approximation bounds on random instances");
  add_common(verify, bounds_opts);

  auto* trace = app.add_subcommand("trace", "Dump per-round protocol state as JSON lines");
  add_common(trace, trace_opts);
  trace->add_option("--draw", trace_draw, "Draw index of the first configured size");
  trace->add_option("-o,--out", trace_out, "Output file (default: standard output)");

  auto* scaling = app.add_subcommand("scaling", "Fit per-round time against a + b N^2 + c N M");
  add_common(scaling, scaling_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts, out_dir);
    if (*verify) return cmd_verify_bounds(bounds_opts);
    if (*trace) return cmd_trace(trace_opts, trace_draw, trace_out);
    if (*scaling) return cmd_scaling(scaling_opts);
  } catch (const dgba::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dgba/bounds.hpp"
#include "dgba/harness.hpp"
#include "dgba/satellite.hpp"
#include "dgba/scaling.hpp"
#include "dgba/submodular.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<dgba::GroundElement> ground_of(const std::vector<ref::Pair>& pairs) {
  std::vector<dgba::GroundElement> g;
  for (const auto& [a, t] : pairs) g.push_back({a, t});
  return g;
}

// Bound suite shared by the first three criteria.
struct BoundRun {
  dgba::BoundSuiteReport report;
  double seconds = 0.0;
};

const BoundRun& bound_run() {
  static const BoundRun run = [] {
    BoundRun r;
    const auto t0 = Clock::now();
    r.report = dgba::run_bound_suite(dgba::BoundSuiteConfig{});
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Verdict half_bound() {
  const auto& r = bound_run();
  const int n = r.report.total();
  return {n == 100 && r.report.half_passes == n && r.seconds < 60.0,
          fmt("%d/%d instances meet 1/2, worst ratio %.6f, %.2f s", r.report.half_passes, n,
              r.report.worst_ratio, r.seconds)};
}

Verdict curvature_bound() {
  const auto& r = bound_run();
  const int n = r.report.total();
  return {n == 100 && r.report.curvature_passes == n && r.seconds < 300.0,
          fmt("%d/%d instances meet 1/(1+kappa_e), worst margin %.3e, %.2f s",
              r.report.curvature_passes, n, r.report.worst_curvature_margin, r.seconds)};
}

Verdict q_bound() {
  const auto& r = bound_run();
  const int n = r.report.total();
  return {n == 100 && r.report.q_passes == n,
          fmt("%d/%d instances meet the q bound, worst margin %.3e", r.report.q_passes, n,
              r.report.worst_q_margin)};
}

Verdict submodularity_properties() {
  std::mt19937_64 rng(101);
  int normalized = 0, monotone = 0, submodular = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto [n, m] = support::random_size(rng, 16);
    const auto in = support::random_instance(rng, n, m);
    const auto pairs = ref::all_pairs(n, m);
    const dgba::ObservationOracle o(in.p, in.rho);

    if (o.evaluate({}) == 0.0 && ref::utility(in.p, in.rho, {}) == 0.0) ++normalized;

    const auto big = support::random_mask(rng, pairs.size());
    const auto small = big & support::random_mask(rng, pairs.size());
    if (o.evaluate(support::to_policy(ref::subset(pairs, small))) <=
        o.evaluate(support::to_policy(ref::subset(pairs, big))) + 1e-12)
      ++monotone;

    const std::size_t e = std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng);
    const auto outer = big & ~(std::uint64_t{1} << e);
    const auto inner = outer & support::random_mask(rng, pairs.size());
    auto gain = [&](std::uint64_t mask) {
      auto s = ref::subset(pairs, mask);
      const double base = ref::utility(in.p, in.rho, s);
      s.push_back(pairs[e]);
      return ref::utility(in.p, in.rho, s) - base;
    };
    const dgba::GroundElement el{pairs[e].first, pairs[e].second};
    const double lib_inner = dgba::marginal_gain(o, support::to_policy(ref::subset(pairs, inner)), el);
    const double lib_outer = dgba::marginal_gain(o, support::to_policy(ref::subset(pairs, outer)), el);
    if (lib_inner >= lib_outer - 1e-12 && std::abs(lib_inner - gain(inner)) <= 1e-12 &&
        std::abs(lib_outer - gain(outer)) <= 1e-12)
      ++submodular;
  }
  return {normalized == 1000 && monotone == 1000 && submodular == 1000,
          fmt("normalized %d/1000, monotone %d/1000, submodular %d/1000", normalized, monotone,
              submodular)};
}

// Experiment whose DGBA runs feed the trace and comparison criteria.
const dgba::ExperimentResult& comparison_run() {
  static const dgba::ExperimentResult res = [] {
    dgba::ExperimentConfig cfg;
    cfg.sizes = {{5, 5}, {6, 6}};
    cfg.check_traces = true;
    return dgba::run_experiment(cfg);
  }();
  return res;
}

Verdict trace_properties() {
  const auto& res = comparison_run();
  int runs = 0, ok = 0;
  double worst = 0.0;
  for (const auto& r : res.runs) {
    if (r.solver != "dgba") continue;
    ++runs;
    if (r.ok && r.trace && r.trace->ok()) ++ok;
    if (r.trace) worst = std::max(worst, r.trace->max_increment_error);
  }
  return {runs > 0 && ok == runs,
          fmt("%d/%d DGBA runs disjoint, monotone, union-consistent and increment-exact "
              "(max increment error %.2e)",
              ok, runs, worst)};
}

Verdict union_and_curvature() {
  std::mt19937_64 rng(106);
  int union_ok = 0, curvature_ok = 0, xi_ok = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto [n, m] = support::random_size(rng, 16);
    const auto in = support::random_instance(rng, n, m);
    const auto pairs = ref::all_pairs(n, m);
    const auto a = ref::subset(pairs, support::random_mask(rng, pairs.size()));
    const auto b = ref::subset(pairs, support::random_mask(rng, pairs.size()));
    const dgba::ObservationOracle o(in.p, in.rho);
    const auto pa = support::to_policy(a);
    double sum = 0.0;
    auto both = a;
    for (const auto& e : b) {
      if (std::find(a.begin(), a.end(), e) != a.end()) continue;
      both.push_back(e);
      sum += dgba::marginal_gain(o, pa, {e.first, e.second});
    }
    if (ref::utility(in.p, in.rho, both) <= ref::utility(in.p, in.rho, a) + sum + 1e-12)
      ++union_ok;
  }

  int curvature_checks = 0;
  while (curvature_checks < 1000) {
    const auto [n, m] = support::random_size(rng, 8);
    const auto pairs = ref::all_pairs(n, m);
    if (pairs.size() < 2) continue;
    const auto in = support::random_instance(rng, n, m);
    const dgba::ObservationOracle o(in.p, in.rho);
    const double kappa = dgba::estimate_elemental_curvature(o, ground_of(pairs), 1e-12).kappa_e;
    const auto a = ref::subset(pairs, support::random_mask(rng, pairs.size()));
    std::vector<ref::Pair> extra;
    for (const auto& e : ref::subset(pairs, support::random_mask(rng, pairs.size())))
      if (std::find(a.begin(), a.end(), e) == a.end()) extra.push_back(e);
    if (extra.empty()) continue;
    const auto pa = support::to_policy(a);
    double sum = 0.0;
    for (const auto& [i, j] : extra) sum += dgba::marginal_gain(o, pa, {i, j});
    auto both = a;
    both.insert(both.end(), extra.begin(), extra.end());
    const double xi = dgba::xi_factor(static_cast<long long>(extra.size()), kappa);
    if (ref::utility(in.p, in.rho, both) <= ref::utility(in.p, in.rho, a) + xi * sum + 1e-12)
      ++curvature_ok;
    ++curvature_checks;
  }

  std::uniform_real_distribution<double> kap(0.0, 1.0);
  std::uniform_int_distribution<long long> len(1, 200);
  for (int k = 0; k < 1000; ++k) {
    const double kappa = kap(rng);
    const long long mm = len(rng);
    if (dgba::xi_factor(mm + 1, kappa) <= dgba::xi_factor(mm, kappa) + 1e-15) ++xi_ok;
  }
  return {union_ok == 1000 && curvature_ok == 1000 && xi_ok == 1000,
          fmt("union %d/1000, curvature-scaled union %d/1000, xi non-increasing %d/1000",
              union_ok, curvature_ok, xi_ok)};
}

Verdict comparison() {
  const auto& res = comparison_run();
  bool pass = res.failures() == 0;
  std::string detail;
  for (int s = 0; s < 2; ++s) {
    const auto d = dgba::select_runs(res, "dgba", s);
    const auto a = dgba::select_runs(res, "auction_baseline", s);
    if (d.size() != a.size() || d.empty()) return {false, "missing runs"};
    double ud = 0.0, ua = 0.0, md = 0.0, ma = 0.0;
    int faster = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      ud += d[k]->result.utility;
      ua += a[k]->result.utility;
      md += d[k]->result.messages_per_round();
      ma += a[k]->result.messages_per_round();
      if (d[k]->result.wall_time_s <= a[k]->result.wall_time_s) ++faster;
    }
    const double cnt = static_cast<double>(d.size());
    ud /= cnt, ua /= cnt, md /= cnt, ma /= cnt;
    const bool ok_u = ud >= ua, ok_m = md <= ma, ok_t = faster * 10 >= 8 * static_cast<int>(d.size());
    pass = pass && ok_u && ok_m && ok_t;
    const int n = res.config.sizes[s].first;
    detail += fmt("%sN=M=%d: utility %.4f vs %.4f [%s], messages/round %.2f vs %.2f [%s], "
                  "wall time no slower in %d/%zu draws [%s]",
                  s ? "; " : "", n, ud, ua, ok_u ? "ok" : "short", md, ma, ok_m ? "ok" : "over",
                  faster, d.size(), ok_t ? "ok" : "short");
  }
  return {pass, detail};
}

Verdict scaling() {
  const auto rep = dgba::run_scaling(dgba::ScalingConfig{});
  return {rep.fit.fitted && rep.fit.r_squared >= 0.9,
          fmt("%zu grid points, t = %.3e + %.3e N^2 + %.3e N M, R^2 = %.4f", rep.points.size(),
              rep.fit.a, rep.fit.b, rep.fit.c, rep.fit.r_squared)};
}

Verdict rendezvous() {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> pos(0.0, 10.0), te(19.0, 20.0), obs(2.0, 2.5);
  int terminal_ok = 0, cost_ok = 0;
  double worst_terminal = 0.0, worst_cost = 0.0;
  for (int k = 0; k < 100; ++k) {
    dgba::AgentState a;
    a.position = dgba::Vec3(pos(rng), pos(rng), pos(rng));
    const dgba::Vec3 r(pos(rng), pos(rng), pos(rng));
    const double end = te(rng), deadline = end - obs(rng);
    const auto sim =
        dgba::simulate_rendezvous(a, r, dgba::Vec3::Zero(), 0.0, deadline, end / 2000.0);
    const double dist = (a.position - r).norm();
    const double terminal = (sim.final_state.position - r).norm() / dist;
    const double want = ref::rest_to_rest_effort(dist, deadline);
    const double cost = std::abs(sim.cost - want) / want;
    worst_terminal = std::max(worst_terminal, terminal);
    worst_cost = std::max(worst_cost, cost);
    if (terminal <= 1e-3) ++terminal_ok;
    if (cost <= 0.01) ++cost_ok;
  }
  return {terminal_ok == 100 && cost_ok == 100,
          fmt("terminal error %d/100 (worst %.2e relative), effort %d/100 within 1%% "
              "(worst %.2e)",
              terminal_ok, worst_terminal, cost_ok, worst_cost)};
}

Verdict reproducibility() {
  dgba::ExperimentConfig cfg;
  const std::string first = dgba::series_csv(dgba::run_experiment(cfg));
  const std::string second = dgba::series_csv(dgba::run_experiment(cfg));
  const auto rows = std::count(first.begin(), first.end(), '\n');
  return {first == second && rows > 1,
          fmt("series.csv %s across two runs (%zu bytes, %ld lines)",
              first == second ? "identical" : "differs", first.size(), static_cast<long>(rows))};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{
      half_bound,       curvature_bound,       q_bound,    submodularity_properties,
      trace_properties, union_and_curvature,   comparison, scaling,
      rendezvous,       reproducibility};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("criterion %2zu: %s: %s\n", k + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures ? 1 : 0;
}

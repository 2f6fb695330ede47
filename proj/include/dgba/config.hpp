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

// JSON configuration with sections "scenario", "experiment", "bounds" and
// "scaling". A file only needs the keys it changes; every key it names must
// exist in the defaults, and `a.b=value` overrides follow the same rule.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgba/bounds.hpp"
#include "dgba/common.hpp"
#include "dgba/harness.hpp"
#include "dgba/satellite.hpp"
#include "dgba/scaling.hpp"

namespace dgba {

struct AppConfig {
  ExperimentConfig experiment;  // experiment.scenario is the "scenario" section
  BoundSuiteConfig bounds;      // bounds.scenario mirrors it
  ScalingConfig scaling;
};

namespace detail {

using nlohmann::json;

inline json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

inline Interval interval_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigurationError(std::string("scenario.") + key + ": expected [lo, hi]");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (iv.lo > iv.hi) throw ConfigurationError(std::string("scenario.") + key + ": lo > hi");
  return iv;
}

/// Same kind of JSON value, with integers accepted where reals are expected
/// and a lone number accepted for `phi`.
inline bool compatible(const json& def, const json& v, const std::string& path) {
  if (path == "scenario.phi") return v.is_number() || v.is_array();
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_unsigned()) return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  if (def.is_number_integer()) return v.is_number_integer();
  return def.type() == v.type();
}

inline void check_keys(const json& def, const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigurationError(path.empty() ? "config: expected an object" : path + ": expected an object");
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + '.' + it.key();
    if (!def.contains(it.key())) throw ConfigurationError("config: unknown key '" + key + "'");
    const json& d = def.at(it.key());
    if (d.is_object()) {
      check_keys(d, it.value(), key);
    } else if (!compatible(d, it.value(), key)) {
      throw ConfigurationError("config: '" + key + "' expects " + std::string(d.type_name()) +
                               ", got " + it.value().type_name());
    }
  }
}

}  // namespace detail

inline nlohmann::json to_json(const AppConfig& c) {
  using nlohmann::json;
  const ScenarioConfig& s = c.experiment.scenario;
  const ExperimentConfig& e = c.experiment;
  json sizes = json::array();
  for (const auto& [n, m] : e.sizes) sizes.push_back({n, m});
  return json{
      {"scenario",
       {{"n_agents", s.n_agents},
        {"n_targets", s.n_targets},
        {"box_size", s.box_size},
        {"phi", s.phi},
        {"lambda", s.lambda},
        {"drag_coeff", s.drag_coeff},
        {"target_speed", s.target_speed},
        {"end_time", detail::interval_json(s.end_time)},
        {"obs_duration", detail::interval_json(s.obs_duration)},
        {"obs_radius", detail::interval_json(s.obs_radius)},
        {"info_value", detail::interval_json(s.info_value)},
        {"steps", s.steps},
        {"loiter_accel", s.loiter_accel},
        {"budget_factor", s.budget_factor},
        {"budgets", s.budgets},
        {"exclusive_targets", s.exclusive_targets},
        {"reallocate", s.reallocate}}},
      {"experiment",
       {{"solvers", e.solvers},
        {"n_monte_carlo", e.n_monte_carlo},
        {"seed", e.seed},
        {"sizes", sizes},
        {"threads", e.threads},
        {"moving_average", e.moving_average},
        {"moving_average_window", e.moving_average_window},
        {"check_traces", e.check_traces},
        {"curvature_cap", e.curvature_cap}}},
      {"bounds",
       {{"instances", c.bounds.instances},
        {"max_agents", c.bounds.max_agents},
        {"max_targets", c.bounds.max_targets},
        {"seed", c.bounds.seed},
        {"curvature_cap", c.bounds.curvature_cap},
        {"curvature_epsilon", c.bounds.curvature_epsilon},
        {"budget_scale_lo", c.bounds.budget_scale_lo},
        {"budget_scale_hi", c.bounds.budget_scale_hi}}},
      {"scaling",
       {{"agents", c.scaling.agents},
        {"targets", c.scaling.targets},
        {"rounds", c.scaling.rounds},
        {"batches", c.scaling.batches},
        {"seed", c.scaling.seed}}}};
}

/// Reads a complete document (defaults merged with the user's keys).
inline AppConfig from_json(const nlohmann::json& j) {
  AppConfig c;
  try {
    const auto& s = j.at("scenario");
    ScenarioConfig& sc = c.experiment.scenario;
    sc.n_agents = s.at("n_agents").get<int>();
    sc.n_targets = s.at("n_targets").get<int>();
    sc.box_size = s.at("box_size").get<double>();
    const auto& phi = s.at("phi");
    sc.phi = phi.is_number() ? std::vector<double>{phi.get<double>()} : phi.get<std::vector<double>>();
    sc.lambda = s.at("lambda").get<double>();
    sc.drag_coeff = s.at("drag_coeff").get<double>();
    sc.target_speed = s.at("target_speed").get<double>();
    sc.end_time = detail::interval_from(s.at("end_time"), "end_time");
    sc.obs_duration = detail::interval_from(s.at("obs_duration"), "obs_duration");
    sc.obs_radius = detail::interval_from(s.at("obs_radius"), "obs_radius");
    sc.info_value = detail::interval_from(s.at("info_value"), "info_value");
    sc.steps = s.at("steps").get<int>();
    sc.loiter_accel = s.at("loiter_accel").get<double>();
    sc.budget_factor = s.at("budget_factor").get<double>();
    sc.budgets = s.at("budgets").get<std::vector<double>>();
    sc.exclusive_targets = s.at("exclusive_targets").get<bool>();
    sc.reallocate = s.at("reallocate").get<bool>();

    const auto& e = j.at("experiment");
    ExperimentConfig& ec = c.experiment;
    ec.solvers = e.at("solvers").get<std::vector<std::string>>();
    ec.n_monte_carlo = e.at("n_monte_carlo").get<int>();
    ec.seed = e.at("seed").get<std::uint64_t>();
    ec.sizes.clear();
    for (const auto& p : e.at("sizes")) {
      if (!p.is_array() || p.size() != 2)
        throw ConfigurationError("experiment.sizes: expected a list of [N, M] pairs");
      ec.sizes.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    ec.threads = e.at("threads").get<int>();
    ec.moving_average = e.at("moving_average").get<bool>();
    ec.moving_average_window = e.at("moving_average_window").get<int>();
    ec.check_traces = e.at("check_traces").get<bool>();
    ec.curvature_cap = e.at("curvature_cap").get<std::size_t>();

    const auto& b = j.at("bounds");
    c.bounds.instances = b.at("instances").get<int>();
    c.bounds.max_agents = b.at("max_agents").get<int>();
    c.bounds.max_targets = b.at("max_targets").get<int>();
    c.bounds.seed = b.at("seed").get<std::uint64_t>();
    c.bounds.curvature_cap = b.at("curvature_cap").get<std::size_t>();
    c.bounds.curvature_epsilon = b.at("curvature_epsilon").get<double>();
    c.bounds.budget_scale_lo = b.at("budget_scale_lo").get<double>();
    c.bounds.budget_scale_hi = b.at("budget_scale_hi").get<double>();
    c.bounds.scenario = sc;

    const auto& g = j.at("scaling");
    c.scaling.agents = g.at("agents").get<std::vector<int>>();
    c.scaling.targets = g.at("targets").get<std::vector<int>>();
    c.scaling.rounds = g.at("rounds").get<int>();
    c.scaling.batches = g.at("batches").get<int>();
    c.scaling.seed = g.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigurationError(std::string("config: ") + ex.what());
  }

  validate(c.experiment);
  if (c.bounds.instances < 1 || c.bounds.max_agents < 1 || c.bounds.max_targets < 1)
    throw ConfigurationError("bounds: instances and size limits must be >= 1");
  if (std::pow(c.bounds.max_targets + 1.0, c.bounds.max_agents) > kExactOracleCap)
    throw ConfigurationError("bounds: size limits exceed the exact-oracle cap");
  if (!(c.bounds.curvature_epsilon > 0.0))
    throw ConfigurationError("bounds: curvature_epsilon must be > 0");
  if (!(c.bounds.budget_scale_lo > 0.0 && c.bounds.budget_scale_lo <= c.bounds.budget_scale_hi))
    throw ConfigurationError("bounds: need 0 < budget_scale_lo <= budget_scale_hi");
  return c;
}

/// Parses an override value as JSON, falling back to a plain string.
inline nlohmann::json parse_override_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return text;
  }
}

/// Applies `a.b=value` to a complete document.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigurationError("override '" + assignment + "': expected key=value");
  const std::string key = assignment.substr(0, eq);
  nlohmann::json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!node->is_object() || !node->contains(part))
      throw ConfigurationError("override: unknown key '" + key + "'");
    node = &(*node)[part];
  }
  if (node->is_object()) throw ConfigurationError("override: '" + key + "' is a section");
  const nlohmann::json value = parse_override_value(assignment.substr(eq + 1));
  if (!detail::compatible(*node, value, key))
    throw ConfigurationError("override: '" + key + "' expects " + std::string(node->type_name()) +
                             ", got " + value.type_name());
  *node = value;
}

/// Defaults, then the file's keys (if a path is given), then the overrides.
/// Returns the effective document; `out` receives the parsed form.
inline nlohmann::json load_config(const std::string& path, const std::vector<std::string>& overrides,
                                  AppConfig& out) {
  nlohmann::json doc = to_json(AppConfig{});
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigurationError("config: cannot open '" + path + "'");
    nlohmann::json user;
    try {
      user = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& ex) {
      throw ConfigurationError("config: " + path + ": " + ex.what());
    }
    detail::check_keys(doc, user, "");
    doc.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(doc, o);
  out = from_json(doc);
  // Echo the normalized form, e.g. a lone phi becomes a list.
  return to_json(out);
}

}  // namespace dgba

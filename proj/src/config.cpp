// Copyright 2026 The ShopSim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shopsim/config.hpp"

#include <fmt/core.h>

#include <fstream>
#include <initializer_list>
#include <set>

namespace shopsim {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{}: wrong type", where, key));
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(fmt::format("{}: missing '{}'", where, key));
  return get<T>(obj, key, where, T{});
}

CustomerClass parse_class(const json& j, std::size_t i) {
  const std::string where = fmt::format("classes[{}]", i);
  only_keys(j, where, {"name", "preset", "probabilities", "think_means"});
  CustomerClass c;
  if (j.contains("preset")) {
    const auto preset = get<std::string>(j, "preset", where, "");
    bool found = false;
    for (const auto& p : preset_classes()) {
      if (p.name == preset) {
        c = p;
        found = true;
      }
    }
    if (!found) throw ConfigError(fmt::format("{}: unknown preset '{}'", where, preset));
  }
  c.name = get<std::string>(j, "name", where, c.name);
  if (c.name.empty()) throw ConfigError(where + ": missing 'name'");
  for (const auto& [k, v] :
       get<std::map<std::string, double>>(j, "probabilities", where, {})) {
    c.transition_probs[k] = v;
  }
  for (const auto& [k, v] : get<std::map<std::string, double>>(j, "think_means", where, {})) {
    c.think_means[k] = v;
  }
  return c;
}

CbmgGraph parse_graph(const json& j) {
  only_keys(j, "graph", {"entry", "states", "edges"});
  CbmgGraph g;
  g.entry = require<std::string>(j, "entry", "graph");
  if (!j.contains("states") || !j.at("states").is_array()) {
    throw ConfigError("graph: 'states' must be an array");
  }
  std::size_t i = 0;
  for (const auto& s : j.at("states")) {
    const std::string where = fmt::format("graph.states[{}]", i++);
    only_keys(s, where,
              {"name", "kind", "think_mean", "request", "adds_item", "pays", "tally_as"});
    CbmgState st;
    st.name = require<std::string>(s, "name", where);
    const auto kind = parse_state_kind(require<std::string>(s, "kind", where));
    if (!kind) throw ConfigError(where + ": kind must be entry|thinking|instant|absorbing");
    st.kind = *kind;
    st.think_mean = get<double>(s, "think_mean", where, 0.0);
    if (s.contains("request")) st.request = get<std::string>(s, "request", where, "");
    st.adds_item = get<bool>(s, "adds_item", where, false);
    st.pays = get<bool>(s, "pays", where, false);
    st.tally_as = get<std::string>(s, "tally_as", where, "");
    g.states.push_back(std::move(st));
  }
  if (!j.contains("edges") || !j.at("edges").is_array()) {
    throw ConfigError("graph: 'edges' must be an array");
  }
  i = 0;
  for (const auto& e : j.at("edges")) {
    const std::string where = fmt::format("graph.edges[{}]", i++);
    only_keys(e, where, {"from", "label", "to", "requires_items"});
    g.edges.push_back({require<std::string>(e, "from", where),
                       get<std::string>(e, "label", where, ""),
                       require<std::string>(e, "to", where),
                       get<bool>(e, "requires_items", where, false)});
  }
  return g;
}

void parse_scenario(const json& j, ScenarioConfig& cfg) {
  only_keys(j, "scenario", {"name", "preset", "mix", "lambda"});
  if (j.contains("preset")) {
    const auto preset = get<std::string>(j, "preset", "scenario", "");
    const auto mix = preset_mix(preset);
    if (!mix) throw ConfigError("scenario: unknown preset '" + preset + "'");
    cfg.mix = *mix;
    cfg.name = preset;
  }
  if (j.contains("mix")) {
    if (!j.at("mix").is_array()) throw ConfigError("scenario.mix: expected an array");
    ScenarioMix mix;
    std::size_t i = 0;
    for (const auto& m : j.at("mix")) {
      const std::string where = fmt::format("scenario.mix[{}]", i++);
      only_keys(m, where, {"class", "p"});
      mix.classes.push_back(require<std::string>(m, "class", where));
      mix.pmf.push_back(require<double>(m, "p", where));
    }
    cfg.mix = std::move(mix);
  }
  cfg.name = get<std::string>(j, "name", "scenario", cfg.name);
  cfg.lambda = get<double>(j, "lambda", "scenario", cfg.lambda);
}

void parse_run(const json& j, RunOptions& r) {
  only_keys(j, "run",
            {"window", "warmup", "seed", "replications", "threshold",
             "allow_empty_checkout", "fes_enabled", "happiness_rule", "unit_value",
             "sojourn_includes_response", "queue_sample_interval"});
  r.window = get<double>(j, "window", "run", r.window);
  r.warmup = get<double>(j, "warmup", "run", r.warmup);
  r.seed = get<std::uint64_t>(j, "seed", "run", r.seed);
  r.replications = get<int>(j, "replications", "run", r.replications);
  r.threshold = get<double>(j, "threshold", "run", r.threshold);
  r.allow_empty_checkout =
      get<bool>(j, "allow_empty_checkout", "run", r.allow_empty_checkout);
  r.fes_enabled = get<bool>(j, "fes_enabled", "run", r.fes_enabled);
  const auto rule = get<std::string>(j, "happiness_rule", "run",
                                     std::string(to_string(r.happiness)));
  const auto parsed = parse_happiness_rule(rule);
  if (!parsed) throw ConfigError("run.happiness_rule: expected 'mean' or 'max'");
  r.happiness = *parsed;
  r.unit_value = get<double>(j, "unit_value", "run", r.unit_value);
  r.sojourn_includes_response =
      get<bool>(j, "sojourn_includes_response", "run", r.sojourn_includes_response);
  r.queue_sample_interval =
      get<double>(j, "queue_sample_interval", "run", r.queue_sample_interval);
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  only_keys(doc, "config",
            {"scenario", "sweep", "classes", "graph", "farm", "routes", "wan", "run",
             "reference"});
  ScenarioConfig cfg;
  if (doc.contains("scenario")) parse_scenario(doc.at("scenario"), cfg);
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    only_keys(s, "sweep", {"from", "to", "step"});
    SweepRange r;
    r.from = get<double>(s, "from", "sweep", r.from);
    r.to = get<double>(s, "to", "sweep", r.to);
    r.step = get<double>(s, "step", "sweep", r.step);
    cfg.sweep = r;
  }
  if (doc.contains("classes")) {
    if (!doc.at("classes").is_array()) throw ConfigError("classes: expected an array");
    cfg.classes.clear();
    std::size_t i = 0;
    for (const auto& c : doc.at("classes")) cfg.classes.push_back(parse_class(c, i++));
  }
  if (doc.contains("graph")) cfg.graph = parse_graph(doc.at("graph"));
  if (doc.contains("farm")) {
    const json& f = doc.at("farm");
    only_keys(f, "farm", {"servers", "front_end"});
    if (f.contains("servers")) {
      if (!f.at("servers").is_array()) throw ConfigError("farm.servers: expected an array");
      cfg.farm.servers.clear();
      std::size_t i = 0;
      for (const auto& s : f.at("servers")) {
        const std::string where = fmt::format("farm.servers[{}]", i++);
        only_keys(s, where, {"name", "mean", "sigma", "floor"});
        ServerSpec spec;
        spec.name = require<std::string>(s, "name", where);
        spec.mean_service = require<double>(s, "mean", where);
        spec.sigma = get<double>(s, "sigma", where, spec.mean_service / 30.0);
        spec.floor = get<double>(s, "floor", where, 0.0);
        cfg.farm.servers.push_back(std::move(spec));
      }
    }
    cfg.farm.routes.front_end =
        get<std::string>(f, "front_end", "farm", cfg.farm.routes.front_end);
  }
  if (doc.contains("routes")) {
    const json& r = doc.at("routes");
    if (!r.is_object()) throw ConfigError("routes: expected an object");
    for (const auto& [type, seq] : r.items()) {
      try {
        cfg.farm.routes.routes[type] = seq.get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw ConfigError("routes." + type + ": expected a list of server names");
      }
    }
  }
  if (doc.contains("wan")) {
    const json& w = doc.at("wan");
    only_keys(w, "wan", {"enabled", "mean", "sigma", "floor"});
    cfg.farm.wan.enabled = get<bool>(w, "enabled", "wan", cfg.farm.wan.enabled);
    cfg.farm.wan.mean = get<double>(w, "mean", "wan", cfg.farm.wan.mean);
    cfg.farm.wan.sigma = get<double>(w, "sigma", "wan", cfg.farm.wan.sigma);
    cfg.farm.wan.floor = get<double>(w, "floor", "wan", cfg.farm.wan.floor);
  }
  if (doc.contains("run")) parse_run(doc.at("run"), cfg.run);
  if (doc.contains("reference")) {
    const json& r = doc.at("reference");
    only_keys(r, "reference", {"lambda_crit", "gt4_at_20", "pm"});
    if (r.contains("lambda_crit")) {
      cfg.reference.lambda_crit = get<double>(r, "lambda_crit", "reference", 0.0);
    }
    if (r.contains("gt4_at_20")) {
      cfg.reference.gt4_at_20 = get<double>(r, "gt4_at_20", "reference", 0.0);
    }
    cfg.reference.pm = get<std::map<std::string, double>>(r, "pm", "reference", {});
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& cfg) {
  json j;
  json mix = json::array();
  for (std::size_t i = 0; i < cfg.mix.classes.size(); ++i) {
    mix.push_back({{"class", cfg.mix.classes[i]}, {"p", cfg.mix.pmf[i]}});
  }
  j["scenario"] = {{"name", cfg.name}, {"mix", mix}, {"lambda", cfg.lambda}};
  if (cfg.sweep) {
    j["sweep"] = {{"from", cfg.sweep->from}, {"to", cfg.sweep->to}, {"step", cfg.sweep->step}};
  }
  json classes = json::array();
  for (const auto& c : cfg.classes) {
    classes.push_back({{"name", c.name},
                       {"probabilities", c.transition_probs},
                       {"think_means", c.think_means}});
  }
  j["classes"] = classes;
  json states = json::array();
  for (const auto& s : cfg.graph.states) {
    json st = {{"name", s.name},           {"kind", std::string(to_string(s.kind))},
               {"think_mean", s.think_mean}, {"adds_item", s.adds_item},
               {"pays", s.pays},           {"tally_as", s.tally_as}};
    if (s.request) st["request"] = *s.request;
    states.push_back(st);
  }
  json edges = json::array();
  for (const auto& e : cfg.graph.edges) {
    edges.push_back({{"from", e.source},
                     {"label", e.label},
                     {"to", e.target},
                     {"requires_items", e.requires_items}});
  }
  j["graph"] = {{"entry", cfg.graph.entry}, {"states", states}, {"edges", edges}};
  json servers = json::array();
  for (const auto& s : cfg.farm.servers) {
    servers.push_back(
        {{"name", s.name}, {"mean", s.mean_service}, {"sigma", s.sigma}, {"floor", s.floor}});
  }
  j["farm"] = {{"servers", servers}, {"front_end", cfg.farm.routes.front_end}};
  j["routes"] = cfg.farm.routes.routes;
  j["wan"] = {{"enabled", cfg.farm.wan.enabled},
              {"mean", cfg.farm.wan.mean},
              {"sigma", cfg.farm.wan.sigma},
              {"floor", cfg.farm.wan.floor}};
  const RunOptions& r = cfg.run;
  j["run"] = {{"window", r.window},
              {"warmup", r.warmup},
              {"seed", r.seed},
              {"replications", r.replications},
              {"threshold", r.threshold},
              {"allow_empty_checkout", r.allow_empty_checkout},
              {"fes_enabled", r.fes_enabled},
              {"happiness_rule", std::string(to_string(r.happiness))},
              {"unit_value", r.unit_value},
              {"sojourn_includes_response", r.sojourn_includes_response},
              {"queue_sample_interval", r.queue_sample_interval}};
  return j;
}

std::string config_fingerprint(const ScenarioConfig& cfg) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace shopsim

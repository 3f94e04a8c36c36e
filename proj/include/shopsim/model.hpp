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

// One replication of the full client/server model: Poisson session source,
// CBMG-driven customers and the server farm, observed by MetricsCollector.

#ifndef SHOPSIM_MODEL_HPP_
#define SHOPSIM_MODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shopsim/behavior.hpp"
#include "shopsim/farm.hpp"
#include "shopsim/metrics.hpp"
#include "shopsim/workload.hpp"

namespace shopsim {

struct RunOptions {
  double window = 7200.0;
  double warmup = 0.0;
  std::uint64_t seed = 20130901;
  int replications = 5;
  double threshold = 4.0;
  bool allow_empty_checkout = false;
  bool fes_enabled = true;
  HappinessRule happiness = HappinessRule::kMeanRt;
  double unit_value = 1.0;
  // Adds each request's response time to the sojourn of the state that
  // issued it (PM4/PM6 otherwise count think time only).
  bool sojourn_includes_response = false;
  double queue_sample_interval = 1.0;
};

struct SweepRange {
  double from = 0.0;
  double to = 30.0;
  double step = 0.5;

  std::vector<double> lambdas() const;
};

// Published values a scenario is compared against; never used as input.
struct ReferenceValues {
  std::optional<double> lambda_crit;
  std::optional<double> gt4_at_20;
  std::map<std::string, double> pm;  // e.g. "PM1.Browse", "PM4"
};

struct ScenarioConfig {
  std::string name = "S1";
  CbmgGraph graph = default_graph();
  std::vector<CustomerClass> classes = preset_classes();
  ScenarioMix mix = *preset_mix("S1");
  double lambda = 0.0;
  FarmSpec farm;
  RunOptions run;
  std::optional<SweepRange> sweep;
  ReferenceValues reference;

  BehaviorOptions behavior_options() const {
    return BehaviorOptions{run.allow_empty_checkout, 10000};
  }
  // The farm with run.fes_enabled applied.
  FarmSpec effective_farm() const;
  // Schema-level and behavioural problems, each naming its subject.
  std::vector<std::string> violations() const;
};

ScenarioConfig preset_scenario(const std::string& name);

// Analytic view of a scenario: CBMG metrics and per-server demands.
struct AnalyticReport {
  AnalyticSessionMetrics mix;
  std::map<std::string, AnalyticSessionMetrics> per_class;
  ServiceDemand demand;
};

AnalyticReport analyze(const ScenarioConfig& cfg);

struct QueueSeries {
  std::vector<std::string> servers;
  std::vector<double> times;
  std::vector<std::vector<std::uint32_t>> lengths;  // [sample][server]
};

struct RequestLogRow {
  std::uint64_t id = 0;
  std::string type;
  std::uint64_t session = 0;
  double issued_at = 0.0;
  double completed_at = 0.0;
  double wan_out = 0.0;
  double wait = 0.0;
  double service = 0.0;
  double wan_in = 0.0;
  std::vector<HopRecord> hops;
};

struct RunExtras {
  bool record_queue = false;
  bool record_requests = false;
};

struct RunResult {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  MetricsReport report;
  QueueSeries queue;
  std::vector<RequestLogRow> requests;
  std::uint64_t events = 0;
};

// Runs one replication of `cfg` at arrival rate `lambda` over
// [0, cfg.run.window]. lambda = 0 yields an empty, degenerate run.
RunResult run_replication(const ScenarioConfig& cfg, double lambda,
                          std::uint64_t seed, RunExtras extras = {});

}  // namespace shopsim

#endif  // SHOPSIM_MODEL_HPP_

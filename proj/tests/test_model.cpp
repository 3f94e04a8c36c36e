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

#include <doctest.h>

#include <cmath>

#include "shopsim/model.hpp"
#include "shopsim/report_io.hpp"

using namespace shopsim;

namespace {

const ServerStats& server(const MetricsReport& r, const std::string& name) {
  for (const auto& s : r.servers) {
    if (s.name == name) return s;
  }
  FAIL("no server " << name);
  return r.servers.front();
}

}  // namespace

TEST_CASE("lambda 0 gives an empty, degenerate run") {
  const RunResult r = run_replication(preset_scenario("S1"), 0.0, 1);
  CHECK(r.report.sessions.started == 0);
  CHECK(r.report.overall.count == 0);
  CHECK(r.report.degenerate);
  CHECK(r.report.law_violations.empty());
}

TEST_CASE("same seed reproduces the report; another seed does not") {
  ScenarioConfig cfg = preset_scenario("S2");
  cfg.run.window = 1800.0;
  const auto a = to_json(run_replication(cfg, 12.0, 5).report).dump();
  const auto b = to_json(run_replication(cfg, 12.0, 5).report).dump();
  const auto c = to_json(run_replication(cfg, 12.0, 6).report).dump();
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("consistency laws hold on every preset, light and overloaded") {
  for (const char* s : {"S1", "S2", "S3"}) {
    for (const double lambda : {3.0, 25.0}) {
      ScenarioConfig cfg = preset_scenario(s);
      cfg.run.window = 1800.0;
      const auto r = run_replication(cfg, lambda, 3);
      CAPTURE(s);
      CAPTURE(lambda);
      CHECK(r.report.law_violations.empty());
      CHECK(r.report.sessions.completed > 0);
    }
  }
}

TEST_CASE("utilization law: WS busy fraction tracks lambda x D(WS)") {
  ScenarioConfig cfg = preset_scenario("S1");
  cfg.run.warmup = 1800.0;
  const double d_ws = analyze(cfg).demand.of("WS");
  const double lambda = 8.0;
  const auto r = run_replication(cfg, lambda, 17).report;
  const auto& ws = server(r, "WS");
  CHECK(ws.utilization == doctest::Approx(lambda * d_ws).epsilon(0.03));
  CHECK(ws.throughput * 0.010 == doctest::Approx(ws.utilization).epsilon(0.03));
  for (const auto& s : r.servers) CHECK(s.utilization < 1.0);
}

TEST_CASE("simulated session metrics approach the analytic oracle") {
  // Long window at low load keeps the completed-session bias small.
  ScenarioConfig cfg = preset_scenario("S1");
  cfg.run.window = 72000.0;
  const auto sim = run_replication(cfg, 1.0, 23).report.sessions;
  const auto oracle = analyze(cfg).mix;
  CHECK(sim.pm4 == doctest::Approx(oracle.pm4).epsilon(0.02));
  CHECK(sim.pm5 == doctest::Approx(oracle.pm5).epsilon(0.03));
  CHECK(sim.pm8 == doctest::Approx(oracle.pm8).epsilon(0.02));
  CHECK(sim.pm1.at("Browse") == doctest::Approx(oracle.pm1.at("Browse")).epsilon(0.02));
  CHECK(sim.pm9 > 0.99);
  CHECK(sim.pm9 < 1.0);
}

TEST_CASE("S1 loads the farm harder than S3 at equal lambda") {
  ScenarioConfig s1 = preset_scenario("S1");
  ScenarioConfig s3 = preset_scenario("S3");
  s1.run.window = s3.run.window = 3600.0;
  const auto a = run_replication(s1, 12.0, 4).report;
  const auto b = run_replication(s3, 12.0, 4).report;
  CHECK(a.overall.mean >= b.overall.mean);
  CHECK(server(a, "WS").utilization > server(b, "WS").utilization);
}

TEST_CASE("run options change what they say") {
  ScenarioConfig cfg = preset_scenario("S1");
  cfg.run.window = 1200.0;
  const auto base = run_replication(cfg, 5.0, 8).report;

  ScenarioConfig no_fes = cfg;
  no_fes.run.fes_enabled = false;
  CHECK(server(run_replication(no_fes, 5.0, 8).report, "FES").arrivals == 0);

  ScenarioConfig with_rt = cfg;
  with_rt.run.sojourn_includes_response = true;
  const auto rt = run_replication(with_rt, 5.0, 8).report;
  CHECK(rt.sessions.pm4 > base.sessions.pm4);
  CHECK(rt.law_violations.empty());

  ScenarioConfig warm = cfg;
  warm.run.warmup = 600.0;
  const auto w = run_replication(warm, 5.0, 8).report;
  CHECK(w.window == 600.0);
  CHECK(w.sessions.started < base.sessions.started);

  ScenarioConfig zero_value = cfg;
  zero_value.run.unit_value = 0.0;
  CHECK(run_replication(zero_value, 5.0, 8).report.sessions.revenue_throughput == 0.0);
  CHECK(base.sessions.revenue_throughput > 0.0);
}

TEST_CASE("recorded request log and queue series") {
  ScenarioConfig cfg = preset_scenario("S1");
  cfg.run.window = 300.0;
  cfg.run.queue_sample_interval = 10.0;
  const auto r = run_replication(cfg, 14.78, 2, {true, true});
  CHECK(r.queue.times.size() == 31);
  CHECK(r.queue.servers.size() == 5);
  CHECK(r.queue.lengths.front().size() == 5);
  CHECK(r.requests.size() == r.report.overall.count);
  for (const auto& row : r.requests) {
    REQUIRE(row.completed_at - row.issued_at ==
            doctest::Approx(row.wan_out + row.wait + row.service + row.wan_in));
  }
}

TEST_CASE("invalid scenarios are rejected before running") {
  ScenarioConfig cfg = preset_scenario("S1");
  cfg.mix.pmf = {0.5, 0.5, 0.5};
  CHECK(!cfg.violations().empty());
  CHECK_THROWS_AS(run_replication(cfg, 1.0, 1), ModelError);
  CHECK_THROWS_AS(preset_scenario("S9"), ModelError);
  CHECK_THROWS_AS(run_replication(preset_scenario("S1"), -1.0, 1), ModelError);
}

TEST_CASE("max-RT happiness rule is never kinder than the mean rule") {
  ScenarioConfig cfg = preset_scenario("S1");
  cfg.run.window = 1800.0;
  ScenarioConfig strict = cfg;
  strict.run.happiness = HappinessRule::kMaxRt;
  const auto a = run_replication(cfg, 13.0, 3).report.buckets;
  const auto b = run_replication(strict, 13.0, 3).report.buckets;
  CHECK(b.gt4 >= a.gt4);
  CHECK(b.lt2 <= a.lt2);
}

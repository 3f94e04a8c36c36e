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
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "shopsim/farm.hpp"
#include "shopsim/model.hpp"

using namespace shopsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Collect : RequestObserver {
  std::vector<Request> done;
  void request_done(const Request& r) override { done.push_back(r); }
};

using Path = std::vector<std::string>;

}  // namespace

TEST_CASE("routes prepend the front end once") {
  const RouteTable rt = default_routes();
  CHECK(route_for(rt, "Search") == Path{"FES", "WS", "ApS", "DbS", "ApS", "WS"});
  CHECK(route_for(rt, "Browse") == Path{"FES", "WS", "DbS", "WS"});
  CHECK(route_for(rt, "Checkout") == Path{"FES", "WS", "AuS", "DbS", "AuS", "WS"});
  CHECK(route_for(rt, "Add") == Path{"FES", "WS", "DbS", "WS"});
  CHECK_THROWS_AS(route_for(rt, "Refund"), std::out_of_range);
  RouteTable no_fes = rt;
  no_fes.fes_enabled = false;
  CHECK(route_for(no_fes, "Browse") == Path{"WS", "DbS", "WS"});
}

TEST_CASE("default servers use sigma = mean / 30") {
  for (const auto& s : default_servers()) CHECK(s.sigma == doctest::Approx(s.mean_service / 30));
  CHECK(FarmSpec{}.violations().empty());
}

TEST_CASE("route naming an unknown server is a named violation") {
  FarmSpec f;
  f.routes.routes["Browse"] = {"WS", "CacheS", "WS"};
  const auto v = f.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("CacheS") != std::string::npos);
}

TEST_CASE("idle farm at means: Browse takes 1.026 s") {
  Simulator sim;
  Collect obs;
  ServerFarm farm(sim, FarmSpec{}, 1, &obs, {true, true});
  farm.serve_request("Browse", 0);
  sim.run(kInf);
  REQUIRE(obs.done.size() == 1);
  CHECK(obs.done[0].response_time() == doctest::Approx(0.5 + 0.001 + 0.010 + 0.005 + 0.010 + 0.5));
  CHECK(obs.done[0].wait == 0.0);
  CHECK(obs.done[0].hops.size() == 4);
}

TEST_CASE("zero-WAN idle farm at means: Search takes 0.046 s") {
  FarmSpec spec;
  spec.wan.enabled = false;
  Simulator sim;
  Collect obs;
  ServerFarm farm(sim, spec, 1, &obs, {false, true});
  farm.serve_request("Search", 0);
  sim.run(kInf);
  REQUIRE(obs.done.size() == 1);
  CHECK(obs.done[0].response_time() == doctest::Approx(0.046));
}

TEST_CASE("second of two simultaneous Browse requests waits the first's WS service") {
  FarmSpec spec;
  spec.wan.enabled = false;
  spec.routes.fes_enabled = false;
  Simulator sim;
  Collect obs;
  ServerFarm farm(sim, spec, 9, &obs, {true, false});
  const auto a = farm.serve_request("Browse", 0);
  const auto b = farm.serve_request("Browse", 1);
  sim.run(kInf);
  REQUIRE(obs.done.size() == 2);
  const Request& first = obs.done[0].id == a ? obs.done[0] : obs.done[1];
  const Request& second = obs.done[0].id == b ? obs.done[0] : obs.done[1];
  const double first_ws = first.hops[0].completed_at - first.hops[0].started_at;
  CHECK(second.hops[0].started_at - second.hops[0].queued_at == doctest::Approx(first_ws));
}

TEST_CASE("service demand arithmetic") {
  const FarmSpec f;
  const auto d = service_demand(f, {{"Search", 1.0}});
  CHECK(d.of("WS") == doctest::Approx(0.020));
  CHECK(d.of("ApS") == doctest::Approx(0.020));
  CHECK(d.of("DbS") == doctest::Approx(0.005));
  CHECK(d.of("FES") == doctest::Approx(0.001));
  CHECK(d.of("AuS") == 0.0);
  CHECK_THROWS_AS(d.of("Nope"), std::out_of_range);

  // Every type visits WS twice, so D(WS) = 2 x 0.010 x requests per session.
  const auto s1 = service_demand(
      f, {{"Browse", 0.9}, {"Search", 0.9}, {"Add", 0.9}, {"Checkout", 0.508}});
  CHECK(s1.of("WS") == doctest::Approx(0.06416));
  CHECK(s1.bottleneck == "WS");
  CHECK(s1.lambda_sat == doctest::Approx(15.59).epsilon(0.001));

  const auto zero = service_demand(f, {});
  for (const double x : zero.demand) CHECK(x == 0.0);
  CHECK(std::isinf(zero.lambda_sat));
}

TEST_CASE("WS is the analytic bottleneck for all presets, and S1 demands the most") {
  double prev = kInf;
  for (const char* s : {"S1", "S2", "S3"}) {
    const auto a = analyze(preset_scenario(s));
    CHECK(a.demand.bottleneck == "WS");
    CHECK(a.demand.max_demand < prev);
    prev = a.demand.max_demand;
  }
}

TEST_CASE("property: response time floor and hop conservation under load") {
  FarmSpec spec;
  spec.wan.enabled = false;
  Simulator sim;
  Collect obs;
  ServerFarm farm(sim, spec, 21, &obs, {true, false});
  RngStream gaps(21, StreamId::kArrivals);
  RngStream pick(21, StreamId::kClassDraw);

  // Feed 20,000 requests at 40/s of mixed types.
  struct Source : EventSink {
    ServerFarm& farm;
    Simulator& sim;
    RngStream& gaps;
    RngStream& pick;
    int left;
    Source(ServerFarm& f, Simulator& s, RngStream& g, RngStream& p, int n)
        : farm(f), sim(s), gaps(g), pick(p), left(n) {}
    void on_event(std::uint64_t) override {
      farm.serve_request(static_cast<std::uint32_t>(pick.uniform() * farm.request_types().size()),
                         0);
      if (--left > 0) sim.schedule_in(sample_exponential(gaps, 1.0 / 40.0), this, 0);
    }
  } src(farm, sim, gaps, pick, 20000);
  sim.schedule(0.0, &src, 0);
  sim.run(kInf);
  REQUIRE(obs.done.size() == 20000);

  for (const auto& r : obs.done) {
    double floor = 0.0;
    for (const auto& h : r.hops) floor += 0.9 * spec.servers[h.server].mean_service;
    REQUIRE(r.response_time() >= floor);
    REQUIRE(r.response_time() == doctest::Approx(r.wait + r.service));
  }
  for (std::size_t i = 0; i < farm.server_count(); ++i) {
    CHECK(farm.server(i).arrivals() == farm.server(i).completions());
    CHECK(farm.server(i).in_system() == 0);
  }
  CHECK(farm.in_flight() == 0);
}

TEST_CASE("unknown request type is rejected by the farm") {
  Simulator sim;
  ServerFarm farm(sim, FarmSpec{}, 1, nullptr);
  CHECK_THROWS_AS(farm.serve_request("Refund", 0), std::out_of_range);
  FarmSpec bad;
  bad.servers[1].mean_service = -1.0;
  CHECK_THROWS_AS(ServerFarm(sim, bad, 1, nullptr), std::invalid_argument);
}

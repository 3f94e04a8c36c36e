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

#include <limits>
#include <utility>
#include <vector>

#include "shopsim/kernel.hpp"
#include "support/oracles.hpp"

using namespace shopsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Records (time, payload) of every dispatch and can run a callback.
struct Recorder : EventSink {
  Simulator& sim;
  std::vector<std::pair<double, std::uint64_t>> seen;
  std::function<void(std::uint64_t)> hook;
  explicit Recorder(Simulator& s) : sim(s) {}
  void on_event(std::uint64_t payload) override {
    seen.emplace_back(sim.now(), payload);
    if (hook) hook(payload);
  }
};

struct Completions : JobListener {
  std::vector<JobRecord> jobs;
  void job_done(FifoResource&, const JobRecord& j) override { jobs.push_back(j); }
};

}  // namespace

TEST_CASE("event scheduled ahead of the clock fires at its time") {
  Simulator sim;
  Recorder r(sim);
  r.hook = [&](std::uint64_t p) {
    if (p == 1) sim.schedule(5.0, &r, 2);
  };
  sim.schedule(3.0, &r, 1);
  sim.run(10.0);
  REQUIRE(r.seen.size() == 2);
  CHECK(r.seen[1].first == 5.0);
  CHECK(r.seen[1].second == 2);
}

TEST_CASE("equal-time events dispatch in creation order") {
  Simulator sim;
  Recorder r(sim);
  for (std::uint64_t p = 0; p < 10; ++p) sim.schedule(5.0, &r, p);
  sim.run(5.0);
  REQUIRE(r.seen.size() == 10);
  for (std::uint64_t p = 0; p < 10; ++p) CHECK(r.seen[p].second == p);
}

TEST_CASE("scheduling in the past is an error") {
  Simulator sim;
  Recorder r(sim);
  bool threw = false;
  r.hook = [&](std::uint64_t) {
    try {
      sim.schedule(2.0, &r, 9);
    } catch (const SchedulingError&) {
      threw = true;
    }
  };
  sim.schedule(3.0, &r, 0);
  sim.run(10.0);
  CHECK(threw);
  CHECK_THROWS_AS(sim.schedule(std::nan(""), &r, 0), SchedulingError);
}

TEST_CASE("run until 0 dispatches nothing") {
  Simulator sim;
  Recorder r(sim);
  sim.schedule(1.0, &r, 0);
  sim.run(0.0);
  CHECK(r.seen.empty());
  CHECK(sim.now() == 0.0);
  CHECK(sim.pending() == 1);
}

TEST_CASE("run stops at the horizon and can resume") {
  Simulator sim;
  Recorder r(sim);
  sim.schedule(1.0, &r, 0);
  sim.schedule(7200.0, &r, 1);
  sim.schedule(7200.5, &r, 2);
  sim.run(7200.0);
  CHECK(r.seen.size() == 2);
  CHECK(sim.now() == 7200.0);
  sim.run(kInf);
  CHECK(r.seen.size() == 3);
  CHECK(sim.now() == 7200.5);
}

TEST_CASE("idle resource completes a 10 ms job at 0.010") {
  Simulator sim;
  Completions done;
  FifoResource res(sim, "WS", &done);
  CHECK(res.enqueue(1, 0.010) == doctest::Approx(0.010));
  sim.run(kInf);
  REQUIRE(done.jobs.size() == 1);
  CHECK(done.jobs[0].completed_at == doctest::Approx(0.010));
  CHECK(done.jobs[0].wait() == 0.0);
}

TEST_CASE("two simultaneous jobs complete in FIFO order") {
  Simulator sim;
  Completions done;
  FifoResource res(sim, "WS", &done);
  res.enqueue(0xa, 0.010);
  res.enqueue(0xb, 0.010);
  CHECK(res.queue_length() == 1);
  CHECK(res.in_system() == 2);
  sim.run(kInf);
  REQUIRE(done.jobs.size() == 2);
  CHECK(done.jobs[0].id == 0xa);
  CHECK(done.jobs[0].completed_at == doctest::Approx(0.010));
  CHECK(done.jobs[1].id == 0xb);
  CHECK(done.jobs[1].completed_at == doctest::Approx(0.020));
  CHECK(done.jobs[1].wait() == doctest::Approx(0.010));
}

TEST_CASE("nonpositive service time is rejected") {
  Simulator sim;
  FifoResource res(sim, "X", nullptr);
  CHECK_THROWS_AS(res.enqueue(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(res.enqueue(1, -1.0), std::invalid_argument);
}

TEST_CASE("M/D/1 with 1000-job runs matches the Pollaczek-Khinchine wait") {
  // lambda = 25/s, D = 20 ms: rho = 0.5. 200 independent runs of 1000 jobs.
  const double lambda = 25.0;
  const double d = 0.020;
  const double expected = testing::pk_mean_wait(lambda, {d, d * d});
  double total = 0.0;
  const int runs = 200;
  for (int i = 0; i < runs; ++i) {
    testing::Mg1Driver drv(lambda, derive_seed(99, i), 1000,
                           [d](RngStream&) { return d; });
    drv.run();
    total += drv.mean_wait();
  }
  CHECK(total / runs == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("property: completion order equals enqueue order and counts balance") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    testing::Mg1Driver drv(50.0, seed, 5000, [](RngStream& s) {
      return sample_truncated_normal(s, 0.015, 0.010);
    });
    Recorder probe(drv.sim());
    bool balanced = true;
    probe.hook = [&](std::uint64_t) {
      const auto& r = drv.server();
      balanced = balanced && r.arrivals() == r.completions() + r.in_system();
    };
    for (int k = 1; k <= 50; ++k) drv.sim().schedule(k * 2.0, &probe, 0);
    double last = 0.0;
    bool monotone = true;
    drv.sim().set_trace([&](const Event& e) {
      monotone = monotone && e.fire_at >= last;
      last = e.fire_at;
    });
    drv.run();
    const auto& order = drv.completion_order();
    REQUIRE(order.size() == 5000);
    bool fifo = true;
    for (std::size_t i = 0; i < order.size(); ++i) fifo = fifo && order[i] == i;
    CHECK(fifo);
    CHECK(balanced);
    CHECK(monotone);
    CHECK(drv.server().arrivals() == drv.server().completions());
  }
}

TEST_CASE("identical seeds give identical event traces") {
  auto trace = [](std::uint64_t seed) {
    std::vector<std::pair<double, std::uint64_t>> t;
    testing::Mg1Driver drv(30.0, seed, 2000, [](RngStream& s) {
      return sample_exponential(s, 0.02);
    });
    drv.sim().set_trace([&](const Event& e) { t.emplace_back(e.fire_at, e.sequence_no); });
    drv.run();
    return t;
  };
  CHECK(trace(5) == trace(5));
  CHECK(trace(5) != trace(6));
}

TEST_CASE("busy time and queue area integrate the sample path") {
  Simulator sim;
  FifoResource res(sim, "S", nullptr);
  Recorder r(sim);
  r.hook = [&](std::uint64_t) { res.enqueue(2, 1.0); };
  res.enqueue(1, 2.0);  // busy [0, 2)
  sim.schedule(1.0, &r, 0);  // waits [1, 2), busy [2, 3)
  sim.run(10.0);
  CHECK(res.busy_time(10.0) == doctest::Approx(3.0));
  CHECK(res.queue_area(10.0) == doctest::Approx(1.0));
  CHECK(res.max_queue_length() == 1);
  res.reset_stats();
  CHECK(res.arrivals() == 0);
  CHECK(res.busy_time(12.0) == 0.0);
  CHECK(res.stats_start() == 3.0);  // clock stopped at the last event
}

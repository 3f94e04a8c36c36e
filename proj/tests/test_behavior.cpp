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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shopsim/behavior.hpp"
#include "shopsim/workload.hpp"

using namespace shopsim;

namespace {

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

std::size_t index_of(const ClassBehavior& b, const std::string& name) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.state(i).name == name) return i;
  }
  FAIL("no state " << name);
  return 0;
}

// Entry -> Loop; Loop -> Loop (stay) | Exit (leave).
CbmgGraph loop_graph() {
  CbmgGraph g;
  g.entry = "Entry";
  g.states = {{"Entry", StateKind::kEntry, 0.0, std::nullopt, false, false, ""},
              {"Loop", StateKind::kThinking, 10.0, "Browse", false, false, ""},
              {"Exit", StateKind::kAbsorbing, 0.0, std::nullopt, false, false, ""}};
  g.edges = {{"Entry", "", "Loop", false},
             {"Loop", "stay", "Loop", false},
             {"Loop", "leave", "Exit", false}};
  return g;
}

// Browse once, add nothing, end.
CustomerClass always_end() {
  CustomerClass c = rare_shopper();
  c.name = "always_end";
  c.transition_probs["Browse"] = 1.0;
  c.transition_probs["Search"] = 0.0;
  c.transition_probs["Add"] = 0.0;
  c.transition_probs["NotAdd"] = 1.0;
  for (int k = 1; k <= 3; ++k) {
    c.transition_probs["Continue" + std::to_string(k)] = 0.0;
    c.transition_probs["Checkout" + std::to_string(k)] = 0.0;
    c.transition_probs["End" + std::to_string(k)] = 1.0;
  }
  return c;
}

}  // namespace

TEST_CASE("preset shopper classes validate against the default graph") {
  for (const auto& c : preset_classes()) {
    CHECK(validate_graph(default_graph(), c).empty());
  }
}

TEST_CASE("decision group summing to 1.5 is a named violation") {
  CustomerClass c = frequent_shopper();
  c.transition_probs["Continue1"] = 0.5;
  c.transition_probs["Checkout1"] = 0.5;
  c.transition_probs["End1"] = 0.5;
  const auto v = validate_graph(default_graph(), c);
  CHECK(any_contains(v, "sums to 1.5"));
  CHECK(any_contains(v, "Decision1"));
  CHECK_THROWS_AS(ClassBehavior(default_graph(), c), ModelError);
}

TEST_CASE("unreachable state is a named violation") {
  CbmgGraph g = default_graph();
  g.states.push_back({"Orphan", StateKind::kInstant, 0.0, std::nullopt, false, false, ""});
  g.edges.push_back({"Orphan", "", "ExitNoPay", false});
  const auto v = validate_graph(g, frequent_shopper());
  CHECK(any_contains(v, "Orphan"));
  CHECK(any_contains(v, "unreachable"));
}

TEST_CASE("missing label, unknown target and bad probability are violations") {
  CustomerClass c = ordinary_shopper();
  c.transition_probs.erase("Found");
  CHECK(!validate_graph(default_graph(), c).empty());

  CbmgGraph g = default_graph();
  g.edges.push_back({"Checkout", "", "Nowhere", false});
  CHECK(!validate_graph(g, ordinary_shopper()).empty());

  CustomerClass neg = ordinary_shopper();
  neg.transition_probs["Browse"] = -0.5;
  neg.transition_probs["Search"] = 1.5;
  CHECK(!validate_graph(default_graph(), neg).empty());
}

TEST_CASE("a class that can never leave is a singular chain naming the class") {
  CbmgGraph g = loop_graph();
  CustomerClass c{"stuck", {{"stay", 1.0}, {"leave", 0.0}}, {}};
  const auto v = validate_graph(g, c);
  CHECK(any_contains(v, "stuck"));
  CHECK_THROWS_AS(ClassBehavior(g, c), SingularChainError);
}

TEST_CASE("entry split is 50/50 within 1% over a million draws") {
  const ClassBehavior b(default_graph(), ordinary_shopper());
  RngStream rng(3, StreamId::kTransitions);
  const std::size_t browse = index_of(b, "Browse");
  int hits = 0;
  for (int i = 0; i < 1'000'000; ++i) hits += sample_transition(b, b.entry(), 0, rng) == browse;
  CHECK(std::abs(hits / 1e6 - 0.5) <= 0.01);
}

TEST_CASE("rare shopper decision group ends about 80% of the time") {
  const ClassBehavior b(default_graph(), rare_shopper());
  RngStream rng(4, StreamId::kTransitions);
  const std::size_t d1 = index_of(b, "Decision1");
  const std::size_t end = index_of(b, "ExitNoPay");
  int with_items = 0;
  int empty = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    with_items += sample_transition(b, d1, 1, rng) == end;
    empty += sample_transition(b, d1, 0, rng) == end;
  }
  CHECK(with_items / double(n) == doctest::Approx(0.80).epsilon(0.01));
  // Strict cart: checkout mass moves proportionally onto continue and end.
  CHECK(empty / double(n) == doctest::Approx(0.80 / 0.90).epsilon(0.01));
}

TEST_CASE("probability-1 edge always goes to its target") {
  const ClassBehavior b(default_graph(), frequent_shopper());
  RngStream rng(5, 0u);
  const std::size_t add = index_of(b, "AddToCart.browse");
  const std::size_t d1 = index_of(b, "Decision1");
  for (int i = 0; i < 1000; ++i) REQUIRE(sample_transition(b, add, 1, rng) == d1);
  CHECK_THROWS_AS(sample_transition(b, index_of(b, "ExitPay"), 1, rng), std::logic_error);
}

TEST_CASE("forced path yields one Browse, one request, empty abandonment") {
  const ClassBehavior b(default_graph(), always_end());
  RngStream tr(1, StreamId::kTransitions);
  RngStream th(1, StreamId::kThinkTimes);
  std::vector<std::string> emitted;
  const SessionRecord rec = simulate_session(
      b, tr, th, 0.0, [&](const std::string& type, SimTime) { emitted.push_back(type); });
  CHECK(rec.visits[index_of(b, "Browse")] == 1);
  CHECK(rec.visits[index_of(b, "Search")] == 0);
  CHECK(emitted == std::vector<std::string>{"Browse"});
  CHECK(rec.requests.size() == 1);
  CHECK(rec.outcome == SessionOutcome::kAbandonedEmpty);
  CHECK(rec.items_added == 0);
}

TEST_CASE("frequent shopper visit counts match the fundamental matrix") {
  const ClassBehavior b(default_graph(), frequent_shopper());
  const VisitSolution oracle = expected_visits(b);
  RngStream tr(77, StreamId::kTransitions);
  RngStream th(77, StreamId::kThinkTimes);
  std::vector<double> visits(b.size(), 0.0);
  std::vector<double> sojourn(b.size(), 0.0);
  const int n = 50'000;
  for (int i = 0; i < n; ++i) {
    const auto rec = simulate_session(b, tr, th, 0.0, [](const std::string&, SimTime) {});
    for (std::size_t s = 0; s < b.size(); ++s) {
      visits[s] += rec.visits[s];
      sojourn[s] += rec.sojourn[s];
    }
  }
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (oracle.visits[s] < 0.1) continue;
    CAPTURE(b.state(s).name);
    CHECK(visits[s] / n == doctest::Approx(oracle.visits[s]).epsilon(0.02));
    if (b.state(s).kind == StateKind::kThinking) {
      CHECK(sojourn[s] / n ==
            doctest::Approx(oracle.visits[s] * b.state(s).think_mean).epsilon(0.02));
    }
  }
}

TEST_CASE("S1 requests per session agree with the analytic sum") {
  const auto mix = *preset_mix("S1");
  const auto classes = preset_classes();
  const auto analytic = analytic_session_metrics(default_graph(), classes, mix);
  std::vector<ClassBehavior> behaviours;
  for (const auto& c : classes) behaviours.emplace_back(default_graph(), c);
  RngStream pick(8, StreamId::kClassDraw);
  RngStream tr(8, StreamId::kTransitions);
  RngStream th(8, StreamId::kThinkTimes);
  double requests = 0.0;
  const int n = 50'000;
  for (int i = 0; i < n; ++i) {
    const auto& b = behaviours[draw_class_index(mix, pick)];
    requests += static_cast<double>(
        simulate_session(b, tr, th, 0.0, [](const std::string&, SimTime) {}).requests.size());
  }
  CHECK(requests / n == doctest::Approx(analytic.pm8).epsilon(0.02));
  MESSAGE("S1 requests/session: simulated " << requests / n << ", analytic " << analytic.pm8
                                            << ", published 3.20799");
}

TEST_CASE("geometric self-loop has two expected visits") {
  CustomerClass c{"coin", {{"stay", 0.5}, {"leave", 0.5}}, {}};
  const ClassBehavior b(loop_graph(), c);
  const auto sol = expected_visits(b);
  CHECK(sol.visits[index_of(b, "Loop")] == doctest::Approx(2.0));
  CHECK(sol.visits[index_of(b, "Entry")] == doctest::Approx(1.0));
  CHECK(sol.p_abandoned_empty == doctest::Approx(1.0));
}

TEST_CASE("forced path Entry, Browse, End visits Browse once") {
  const ClassBehavior b(default_graph(), always_end());
  const auto sol = expected_visits(b);
  CHECK(sol.visits[index_of(b, "Browse")] == doctest::Approx(1.0));
  CHECK(sol.visits[index_of(b, "Search")] == doctest::Approx(0.0));
  const auto m = analytic_class_metrics(b);
  CHECK(m.pm4 == doctest::Approx(60.0));
  CHECK(m.pm5 == doctest::Approx(0.0));
  CHECK(m.pm7 == doctest::Approx(1.0));
}

TEST_CASE("analytic identities hold for every preset and mix") {
  for (const char* s : {"S1", "S2", "S3"}) {
    const auto m = analytic_session_metrics(default_graph(), preset_classes(), *preset_mix(s));
    double pm2 = 0.0;
    for (const auto& [k, v] : m.pm2) pm2 += v;
    CHECK(pm2 == doctest::Approx(1.0));
    double pm4 = 0.0;
    for (const auto& [k, v] : m.pm6) pm4 += v;
    CHECK(m.pm4 == doctest::Approx(pm4));
    // Think means are 60/60/180 s for every class.
    CHECK(m.pm4 == doctest::Approx(60.0 * m.pm1.at("Browse") + 60.0 * m.pm1.at("Search") +
                                   180.0 * m.pm1.at("Checkout")));
    CHECK(m.pm3 + m.pm5 + m.pm7 == doctest::Approx(1.0));
    CHECK(m.pm8 == doctest::Approx(m.pm1.at("Browse") + m.pm1.at("Search") +
                                   m.pm1.at("Checkout") + m.pm1.at("AddToCart")));
    MESSAGE(s << " PM1 Browse " << m.pm1.at("Browse") << " Search " << m.pm1.at("Search")
              << " AddToCart " << m.pm1.at("AddToCart") << " Checkout "
              << m.pm1.at("Checkout") << " PM4 " << m.pm4 << " PM5 " << m.pm5);
  }
}

TEST_CASE("permissive checkout lets empty carts pay") {
  BehaviorOptions opts;
  opts.allow_empty_checkout = true;
  const ClassBehavior strict(default_graph(), rare_shopper());
  const ClassBehavior loose(default_graph(), rare_shopper(), opts);
  CHECK(expected_visits(loose).p_paid > expected_visits(strict).p_paid);
}

TEST_CASE("transition cap breach is an error") {
  BehaviorOptions opts;
  opts.max_transitions = 10;
  CustomerClass c{"sticky", {{"stay", 0.999}, {"leave", 0.001}}, {}};
  const ClassBehavior b(loop_graph(), c, opts);
  RngStream tr(1, 0u);
  RngStream th(1, 1u);
  CHECK_THROWS_AS(simulate_session(b, tr, th, 0.0, [](const std::string&, SimTime) {}),
                  ModelError);
}

TEST_CASE("session open at the horizon is cut off") {
  const ClassBehavior b(default_graph(), frequent_shopper());
  RngStream tr(2, 0u);
  RngStream th(2, 1u);
  const auto rec = simulate_session(b, tr, th, 0.0, [](const std::string&, SimTime) {}, 1e-6);
  CHECK(rec.outcome == SessionOutcome::kCutOffByWindow);
}

TEST_CASE("class think-time override replaces the graph default") {
  CustomerClass c = always_end();
  c.think_means["Browse"] = 30.0;
  const ClassBehavior b(default_graph(), c);
  CHECK(analytic_class_metrics(b).pm4 == doctest::Approx(30.0));
}

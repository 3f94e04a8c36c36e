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

// Customer behaviour model graphs (CBMGs): data model, per-class
// parameterisation, session walks and the absorbing-chain solver.

#ifndef SHOPSIM_BEHAVIOR_HPP_
#define SHOPSIM_BEHAVIOR_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shopsim/kernel.hpp"
#include "shopsim/rng.hpp"

namespace shopsim {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when some walk cannot reach an absorbing state.
class SingularChainError : public ModelError {
 public:
  using ModelError::ModelError;
};

enum class StateKind { kEntry, kThinking, kInstant, kAbsorbing };

std::string_view to_string(StateKind kind);
std::optional<StateKind> parse_state_kind(std::string_view s);

struct CbmgState {
  std::string name;
  StateKind kind = StateKind::kInstant;
  double think_mean = 0.0;  // default; classes may override
  std::optional<std::string> request;  // request type emitted on a visit
  bool adds_item = false;   // visit puts one item in the cart
  bool pays = false;        // absorbing state that pays the cart
  std::string tally_as;     // metric name; empty means `name`

  const std::string& tally_name() const {
    return tally_as.empty() ? name : tally_as;
  }
};

struct CbmgEdge {
  std::string source;
  std::string label;  // key into CustomerClass::transition_probs
  std::string target;
  bool requires_items = false;  // checkout edge, subject to the cart rule
};

struct CbmgGraph {
  std::vector<CbmgState> states;
  std::vector<CbmgEdge> edges;
  std::string entry;

  std::optional<std::size_t> find(std::string_view name) const;
};

// Entry -> Browse | Search; both lead through optional Add-to-Cart into one
// of three Continue/Checkout/End decision groups; Checkout pays and exits.
CbmgGraph default_graph();

struct CustomerClass {
  std::string name;
  std::map<std::string, double> transition_probs;
  std::map<std::string, double> think_means;  // overrides graph defaults
};

CustomerClass rare_shopper();
CustomerClass ordinary_shopper();
CustomerClass frequent_shopper();
std::vector<CustomerClass> preset_classes();

struct BehaviorOptions {
  // When false, a Checkout edge is unavailable with an empty cart and its
  // probability is shared proportionally among the group's other edges.
  bool allow_empty_checkout = false;
  std::size_t max_transitions = 10000;
};

// Empty iff (graph, class) is a well-formed, absorbing CBMG.
std::vector<std::string> validate_graph(const CbmgGraph& g,
                                        const CustomerClass& c,
                                        const BehaviorOptions& opts = {});

// A (graph, class) pair resolved to dense indices. Immutable and shareable.
class ClassBehavior {
 public:
  struct Edge {
    std::size_t target;
    double prob;
    double prob_empty_cart;  // after the cart rule is applied
    bool requires_items;
  };
  struct State {
    std::string name;
    std::string tally;
    StateKind kind;
    double think_mean;
    std::optional<std::string> request;
    bool adds_item;
    bool pays;
    std::vector<Edge> edges;
  };

  // Throws ModelError listing every violation.
  ClassBehavior(const CbmgGraph& g, const CustomerClass& c,
                const BehaviorOptions& opts = {});

  const std::string& class_name() const { return class_name_; }
  const BehaviorOptions& options() const { return opts_; }
  std::size_t entry() const { return entry_; }
  std::size_t size() const { return states_.size(); }
  const State& state(std::size_t i) const { return states_[i]; }
  const std::vector<State>& states() const { return states_; }
  bool absorbing(std::size_t i) const {
    return states_[i].kind == StateKind::kAbsorbing;
  }

 private:
  std::string class_name_;
  BehaviorOptions opts_;
  std::size_t entry_ = 0;
  std::vector<State> states_;
};

// Draws the successor of `at`. Throws std::logic_error on absorbing states.
std::size_t sample_transition(const ClassBehavior& b, std::size_t at,
                              std::uint32_t cart_items, RngStream& rng);

enum class SessionOutcome {
  kPaid,
  kAbandonedWithItems,
  kAbandonedEmpty,
  kCutOffByWindow,
};

std::string_view to_string(SessionOutcome o);

struct SessionRecord {
  std::string class_name;
  std::vector<std::uint32_t> visits;  // indexed like ClassBehavior::states()
  std::vector<double> sojourn;        // think seconds per state
  std::vector<std::uint64_t> requests;
  std::uint32_t items_added = 0;
  std::uint32_t items_paid = 0;
  SessionOutcome outcome = SessionOutcome::kCutOffByWindow;
  SimTime start = 0.0;
  SimTime end = 0.0;
  std::size_t transitions = 0;

  void reset(const ClassBehavior& b, SimTime at);
  double think_total() const;
};

// Walks from `state` through zero-time states, recording each visit, until
// it reaches a thinking state (returned, visit recorded, think not yet
// drawn) or an absorbing one. `emit(state)` fires for every zero-time state
// that issues a request.
template <class Emit>
std::size_t advance_session(const ClassBehavior& b, SessionRecord& rec,
                            std::size_t state, RngStream& transitions,
                            Emit&& emit) {
  for (;;) {
    const auto& s = b.state(state);
    ++rec.visits[state];
    if (s.adds_item) ++rec.items_added;
    switch (s.kind) {
      case StateKind::kThinking:
        return state;
      case StateKind::kAbsorbing:
        if (s.pays) {
          rec.items_paid = rec.items_added;
          rec.outcome = SessionOutcome::kPaid;
        } else {
          rec.outcome = rec.items_added > 0
                            ? SessionOutcome::kAbandonedWithItems
                            : SessionOutcome::kAbandonedEmpty;
        }
        return state;
      case StateKind::kEntry:
      case StateKind::kInstant:
        if (s.request) emit(state);
        break;
    }
    if (++rec.transitions > b.options().max_transitions) {
      throw ModelError("session of class " + b.class_name() +
                       " exceeded the transition cap");
    }
    state = sample_transition(b, state, rec.items_added, transitions);
  }
}

// Receives (request type, issue time) from a standalone session walk.
using RequestSink = std::function<void(const std::string&, SimTime)>;

// Walks one full session without a server farm: think times accumulate on a
// private clock starting at `clock`. Sessions still open at `until` end as
// kCutOffByWindow with partial tallies.
SessionRecord simulate_session(
    const ClassBehavior& b, RngStream& transitions, RngStream& think,
    SimTime clock, const RequestSink& dispatch,
    SimTime until = std::numeric_limits<double>::infinity());

struct VisitSolution {
  std::vector<double> visits;  // indexed like ClassBehavior::states()
  double p_paid = 0.0;
  double p_abandoned_with_items = 0.0;
  double p_abandoned_empty = 0.0;
  double items_added = 0.0;
};

// Fundamental-matrix solution of the chain over (state, cart empty?) pairs.
// Throws SingularChainError naming the class if absorption is not certain.
VisitSolution expected_visits(const ClassBehavior& b);

struct ScenarioMix;

struct AnalyticSessionMetrics {
  std::map<std::string, double> pm1;  // expected visits per tally name
  std::map<std::string, double> pm2;  // think-time fraction, thinking states
  std::map<std::string, double> pm6;  // expected think seconds per tally
  double pm3 = 0.0;
  double pm4 = 0.0;
  double pm5 = 0.0;
  double pm7 = 0.0;
  double pm8 = 0.0;
  double items_added = 0.0;
  std::map<std::string, double> requests_by_type;
};

AnalyticSessionMetrics analytic_session_metrics(
    const CbmgGraph& g, const std::vector<CustomerClass>& classes,
    const ScenarioMix& mix, const BehaviorOptions& opts = {});

AnalyticSessionMetrics analytic_class_metrics(const ClassBehavior& b);

}  // namespace shopsim

#endif  // SHOPSIM_BEHAVIOR_HPP_

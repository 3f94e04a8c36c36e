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

#include "shopsim/behavior.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <fmt/core.h>
#include <numeric>
#include <set>

#include "shopsim/workload.hpp"

namespace shopsim {

std::string_view to_string(StateKind kind) {
  switch (kind) {
    case StateKind::kEntry: return "entry";
    case StateKind::kThinking: return "thinking";
    case StateKind::kInstant: return "instant";
    case StateKind::kAbsorbing: return "absorbing";
  }
  return "?";
}

std::optional<StateKind> parse_state_kind(std::string_view s) {
  if (s == "entry") return StateKind::kEntry;
  if (s == "thinking") return StateKind::kThinking;
  if (s == "instant") return StateKind::kInstant;
  if (s == "absorbing") return StateKind::kAbsorbing;
  return std::nullopt;
}

std::string_view to_string(SessionOutcome o) {
  switch (o) {
    case SessionOutcome::kPaid: return "paid";
    case SessionOutcome::kAbandonedWithItems: return "abandoned_with_items";
    case SessionOutcome::kAbandonedEmpty: return "abandoned_empty";
    case SessionOutcome::kCutOffByWindow: return "cut_off_by_window";
  }
  return "?";
}

std::optional<std::size_t> CbmgGraph::find(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].name == name) return i;
  }
  return std::nullopt;
}

CbmgGraph default_graph() {
  using K = StateKind;
  CbmgGraph g;
  g.entry = "Entry";
  g.states = {
      {"Entry", K::kEntry, 0.0, std::nullopt, false, false, ""},
      {"Browse", K::kThinking, 60.0, "Browse", false, false, ""},
      {"Search", K::kThinking, 60.0, "Search", false, false, ""},
      {"Found", K::kInstant, 0.0, std::nullopt, false, false, ""},
      {"AddToCart.browse", K::kInstant, 0.0, "Add", true, false, "AddToCart"},
      {"AddToCart.search", K::kInstant, 0.0, "Add", true, false, "AddToCart"},
      {"Decision1", K::kInstant, 0.0, std::nullopt, false, false, ""},
      {"Decision2", K::kInstant, 0.0, std::nullopt, false, false, ""},
      {"Decision3", K::kInstant, 0.0, std::nullopt, false, false, ""},
      {"Checkout", K::kThinking, 180.0, "Checkout", false, false, ""},
      {"ExitPay", K::kAbsorbing, 0.0, std::nullopt, false, true, ""},
      {"ExitNoPay", K::kAbsorbing, 0.0, std::nullopt, false, false, ""},
  };
  g.edges = {
      {"Entry", "Browse", "Browse", false},
      {"Entry", "Search", "Search", false},
      {"Browse", "Add", "AddToCart.browse", false},
      {"Browse", "NotAdd", "Decision1", false},
      {"Search", "Found", "Found", false},
      {"Search", "NotFound", "Decision3", false},
      {"Found", "Add", "AddToCart.search", false},
      {"Found", "NotAdd", "Decision2", false},
      {"AddToCart.browse", "", "Decision1", false},
      {"AddToCart.search", "", "Decision2", false},
      {"Checkout", "", "ExitPay", false},
  };
  for (int k = 1; k <= 3; ++k) {
    const std::string d = fmt::format("Decision{}", k);
    g.edges.push_back({d, fmt::format("Continue{}", k), "Entry", false});
    g.edges.push_back({d, fmt::format("Checkout{}", k), "Checkout", true});
    g.edges.push_back({d, fmt::format("End{}", k), "ExitNoPay", false});
  }
  return g;
}

namespace {

CustomerClass make_class(std::string name, double browse, double found,
                         double add, double cont, double checkout,
                         double end) {
  CustomerClass c;
  c.name = std::move(name);
  c.transition_probs = {
      {"Browse", browse}, {"Search", 1.0 - browse},
      {"Found", found},   {"NotFound", 1.0 - found},
      {"Add", add},       {"NotAdd", 1.0 - add},
  };
  for (int k = 1; k <= 3; ++k) {
    c.transition_probs[fmt::format("Continue{}", k)] = cont;
    c.transition_probs[fmt::format("Checkout{}", k)] = checkout;
    c.transition_probs[fmt::format("End{}", k)] = end;
  }
  c.think_means = {{"Browse", 60.0}, {"Search", 60.0}, {"Checkout", 180.0}};
  return c;
}

}  // namespace

CustomerClass rare_shopper() {
  return make_class("rare", 0.50, 0.10, 0.10, 0.10, 0.10, 0.80);
}
CustomerClass ordinary_shopper() {
  return make_class("ordinary", 0.50, 0.50, 0.50, 0.33, 0.34, 0.33);
}
CustomerClass frequent_shopper() {
  return make_class("frequent", 0.50, 0.90, 0.90, 0.50, 0.45, 0.05);
}
std::vector<CustomerClass> preset_classes() {
  return {rare_shopper(), ordinary_shopper(), frequent_shopper()};
}

namespace {

// Per-state outgoing edges resolved against a class. `ok` is false when the
// graph references unknown states; other problems land in `violations`.
struct Resolved {
  std::vector<std::vector<ClassBehavior::Edge>> out;
  std::vector<double> think;
  std::size_t entry = 0;
  bool ok = true;
};

Resolved resolve(const CbmgGraph& g, const CustomerClass& c,
                 const BehaviorOptions& opts,
                 std::vector<std::string>& violations) {
  Resolved r;
  const std::size_t n = g.states.size();
  r.out.resize(n);
  r.think.resize(n, 0.0);

  std::set<std::string> names;
  for (const auto& s : g.states) {
    if (!names.insert(s.name).second) {
      violations.push_back(fmt::format("duplicate state {}", s.name));
    }
  }
  if (auto e = g.find(g.entry)) {
    r.entry = *e;
    if (g.states[*e].kind == StateKind::kAbsorbing) {
      violations.push_back(fmt::format("entry state {} is absorbing", g.entry));
    }
  } else {
    violations.push_back(fmt::format("entry state '{}' does not exist", g.entry));
    r.ok = false;
  }

  for (const auto& e : g.edges) {
    const auto src = g.find(e.source);
    const auto dst = g.find(e.target);
    if (!src || !dst) {
      violations.push_back(fmt::format("edge {} -> {} references an unknown state",
                                       e.source, e.target));
      r.ok = false;
      continue;
    }
    r.out[*src].push_back({*dst, 0.0, 0.0, e.requires_items});
  }
  if (!r.ok) return r;

  for (const auto& [state, mean] : c.think_means) {
    if (!g.find(state)) {
      violations.push_back(fmt::format("class {}: think time for unknown state {}",
                                       c.name, state));
    }
  }

  // Edge order in r.out follows g.edges; walk the edges again for labels.
  std::vector<std::vector<std::string>> labels(n);
  for (const auto& e : g.edges) labels[*g.find(e.source)].push_back(e.label);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = g.states[i];
    auto& edges = r.out[i];
    auto over = c.think_means.find(s.name);
    const double think = over != c.think_means.end() ? over->second : s.think_mean;
    if (s.kind == StateKind::kThinking) {
      if (!(think > 0.0)) {
        violations.push_back(fmt::format(
            "class {}: thinking state {} needs a positive think time", c.name,
            s.name));
      }
      r.think[i] = think;
    } else if (think != 0.0) {
      violations.push_back(fmt::format(
          "class {}: zero-time state {} has think time {}", c.name, s.name,
          think));
    }
    if (s.pays && s.kind != StateKind::kAbsorbing) {
      violations.push_back(fmt::format("paying state {} is not absorbing", s.name));
    }

    if (s.kind == StateKind::kAbsorbing) {
      if (!edges.empty()) {
        violations.push_back(
            fmt::format("absorbing state {} has outgoing transitions", s.name));
      }
      continue;
    }
    if (edges.empty()) {
      violations.push_back(fmt::format(
          "non-absorbing state {} has no outgoing transitions", s.name));
      continue;
    }
    if (edges.size() == 1) {
      edges[0].prob = 1.0;
    } else {
      double sum = 0.0;
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto it = c.transition_probs.find(labels[i][k]);
        if (it == c.transition_probs.end()) {
          violations.push_back(fmt::format(
              "class {}: no probability for label '{}' at state {}", c.name,
              labels[i][k], s.name));
          continue;
        }
        if (!(it->second >= 0.0 && it->second <= 1.0)) {
          violations.push_back(fmt::format(
              "class {}: probability of '{}' is {}, outside [0,1]", c.name,
              labels[i][k], it->second));
        }
        edges[k].prob = it->second;
        sum += it->second;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        violations.push_back(fmt::format(
            "class {}: decision group at state {} sums to {}", c.name, s.name,
            sum));
      }
    }

    double free_mass = 0.0;
    bool gated = false;
    for (const auto& e : edges) {
      if (e.requires_items && !opts.allow_empty_checkout) {
        gated = true;
      } else {
        free_mass += e.prob;
      }
    }
    for (auto& e : edges) {
      if (!gated) {
        e.prob_empty_cart = e.prob;
      } else if (e.requires_items) {
        e.prob_empty_cart = 0.0;
      } else {
        e.prob_empty_cart = free_mass > 0.0 ? e.prob / free_mass : 0.0;
      }
    }
  }
  return r;
}

// Index of the (state, cart non-empty) node.
std::size_t node(std::size_t state, bool items) { return 2 * state + (items ? 1 : 0); }

}  // namespace

std::vector<std::string> validate_graph(const CbmgGraph& g,
                                        const CustomerClass& c,
                                        const BehaviorOptions& opts) {
  std::vector<std::string> v;
  Resolved r = resolve(g, c, opts, v);
  if (!r.ok) return v;
  const std::size_t n = g.states.size();

  // Structural reachability from the entry.
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> work{r.entry};
  seen[r.entry] = true;
  while (!work.empty()) {
    const std::size_t s = work.front();
    work.pop_front();
    for (const auto& e : r.out[s]) {
      if (!seen[e.target]) {
        seen[e.target] = true;
        work.push_back(e.target);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) {
      v.push_back(fmt::format("state {} is unreachable from {}", g.states[i].name,
                              g.entry));
    }
  }
  if (!v.empty()) return v;

  // Reachable (state, cart) nodes under this class's positive probabilities.
  std::vector<bool> live(2 * n, false);
  const std::size_t start = node(r.entry, g.states[r.entry].adds_item);
  live[start] = true;
  work = {start};
  while (!work.empty()) {
    const std::size_t id = work.front();
    work.pop_front();
    const std::size_t s = id / 2;
    const bool items = id % 2 == 1;
    double mass = 0.0;
    for (const auto& e : r.out[s]) {
      const double p = items ? e.prob : e.prob_empty_cart;
      mass += p;
      if (p <= 0.0) continue;
      const std::size_t next =
          node(e.target, items || g.states[e.target].adds_item);
      if (!live[next]) {
        live[next] = true;
        work.push_back(next);
      }
    }
    if (!items && !r.out[s].empty() && mass <= 0.0) {
      v.push_back(fmt::format(
          "class {}: state {} has no admissible transition with an empty cart",
          c.name, g.states[s].name));
    }
  }

  // Every live node must be able to reach an absorbing node.
  std::vector<bool> exits(2 * n, false);
  bool changed = true;
  for (std::size_t id = 0; id < 2 * n; ++id) {
    exits[id] = g.states[id / 2].kind == StateKind::kAbsorbing;
  }
  while (changed) {
    changed = false;
    for (std::size_t id = 0; id < 2 * n; ++id) {
      if (exits[id]) continue;
      const bool items = id % 2 == 1;
      for (const auto& e : r.out[id / 2]) {
        const double p = items ? e.prob : e.prob_empty_cart;
        if (p > 0.0 &&
            exits[node(e.target, items || g.states[e.target].adds_item)]) {
          exits[id] = changed = true;
          break;
        }
      }
    }
  }
  std::set<std::string> stuck;
  for (std::size_t id = 0; id < 2 * n; ++id) {
    if (live[id] && !exits[id]) stuck.insert(g.states[id / 2].name);
  }
  for (const auto& s : stuck) {
    v.push_back(fmt::format("class {}: state {} cannot reach an absorbing state",
                            c.name, s));
  }
  return v;
}

ClassBehavior::ClassBehavior(const CbmgGraph& g, const CustomerClass& c,
                             const BehaviorOptions& opts)
    : class_name_(c.name), opts_(opts) {
  const auto violations = validate_graph(g, c, opts);
  if (!violations.empty()) {
    std::string msg = "invalid behaviour model:";
    for (const auto& v : violations) msg += "\n  " + v;
    const bool absorbing_problem = std::any_of(
        violations.begin(), violations.end(), [](const std::string& v) {
          return v.find("cannot reach an absorbing") != std::string::npos;
        });
    if (absorbing_problem) throw SingularChainError(msg);
    throw ModelError(msg);
  }
  std::vector<std::string> unused;
  Resolved r = resolve(g, c, opts, unused);
  entry_ = r.entry;
  states_.reserve(g.states.size());
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    const auto& s = g.states[i];
    states_.push_back(State{s.name, s.tally_name(), s.kind, r.think[i],
                            s.request, s.adds_item, s.pays, std::move(r.out[i])});
  }
}

std::size_t sample_transition(const ClassBehavior& b, std::size_t at,
                              std::uint32_t cart_items, RngStream& rng) {
  const auto& s = b.state(at);
  if (s.kind == StateKind::kAbsorbing) {
    throw std::logic_error("sample_transition called on absorbing state " +
                           s.name);
  }
  const bool empty = cart_items == 0;
  if (s.edges.size() == 1) return s.edges.front().target;
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = s.edges.front().target;
  for (const auto& e : s.edges) {
    const double p = empty ? e.prob_empty_cart : e.prob;
    if (p <= 0.0) continue;
    acc += p;
    last = e.target;
    if (u < acc) return e.target;
  }
  return last;
}

void SessionRecord::reset(const ClassBehavior& b, SimTime at) {
  class_name = b.class_name();
  visits.assign(b.size(), 0);
  sojourn.assign(b.size(), 0.0);
  requests.clear();
  items_added = 0;
  items_paid = 0;
  outcome = SessionOutcome::kCutOffByWindow;
  start = at;
  end = at;
  transitions = 0;
}

double SessionRecord::think_total() const {
  return std::accumulate(sojourn.begin(), sojourn.end(), 0.0);
}

SessionRecord simulate_session(const ClassBehavior& b, RngStream& transitions,
                               RngStream& think, SimTime clock,
                               const RequestSink& dispatch, SimTime until) {
  SessionRecord rec;
  rec.reset(b, clock);
  SimTime t = clock;
  std::uint64_t next_request = 0;
  auto emit = [&](std::size_t state) {
    rec.requests.push_back(next_request++);
    if (dispatch) dispatch(*b.state(state).request, t);
  };
  std::size_t s = advance_session(b, rec, b.entry(), transitions, emit);
  while (!b.absorbing(s)) {
    const double d = sample_exponential(think, b.state(s).think_mean);
    if (t + d > until) {
      rec.outcome = SessionOutcome::kCutOffByWindow;
      rec.end = until;
      return rec;
    }
    t += d;
    rec.sojourn[s] += d;
    if (b.state(s).request) emit(s);
    if (++rec.transitions > b.options().max_transitions) {
      throw ModelError("session of class " + b.class_name() +
                       " exceeded the transition cap");
    }
    s = advance_session(b, rec, sample_transition(b, s, rec.items_added, transitions),
                        transitions, emit);
  }
  rec.end = t;
  return rec;
}

VisitSolution expected_visits(const ClassBehavior& b) {
  const std::size_t n = b.size();
  const std::size_t m = 2 * n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);  // (I - Q)^T
  for (std::size_t s = 0; s < n; ++s) {
    if (b.absorbing(s)) continue;
    for (int items = 0; items < 2; ++items) {
      const std::size_t from = node(s, items == 1);
      for (const auto& e : b.state(s).edges) {
        const double p = items == 1 ? e.prob : e.prob_empty_cart;
        if (p <= 0.0 || b.absorbing(e.target)) continue;
        const std::size_t to =
            node(e.target, items == 1 || b.state(e.target).adds_item);
        a(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) -= p;
      }
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  const std::size_t start = node(b.entry(), b.state(b.entry()).adds_item);
  rhs(static_cast<Eigen::Index>(start)) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw SingularChainError("class " + b.class_name() +
                             ": absorption probability is below 1");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  if ((a * x - rhs).lpNorm<Eigen::Infinity>() > 1e-12 ||
      x.minCoeff() < -1e-12) {
    throw SingularChainError("class " + b.class_name() +
                             ": ill-conditioned absorbing chain");
  }

  VisitSolution out;
  out.visits.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (b.absorbing(s)) continue;
    for (int items = 0; items < 2; ++items) {
      const double v = x(static_cast<Eigen::Index>(node(s, items == 1)));
      out.visits[s] += v;
      for (const auto& e : b.state(s).edges) {
        const double p = items == 1 ? e.prob : e.prob_empty_cart;
        if (p <= 0.0 || !b.absorbing(e.target)) continue;
        const double mass = v * p;
        const bool has_items = items == 1 || b.state(e.target).adds_item;
        out.visits[e.target] += mass;
        if (b.state(e.target).pays) {
          out.p_paid += mass;
        } else if (has_items) {
          out.p_abandoned_with_items += mass;
        } else {
          out.p_abandoned_empty += mass;
        }
      }
    }
    if (b.state(s).adds_item) out.items_added += out.visits[s];
  }
  return out;
}

AnalyticSessionMetrics analytic_class_metrics(const ClassBehavior& b) {
  const VisitSolution sol = expected_visits(b);
  AnalyticSessionMetrics m;
  for (std::size_t s = 0; s < b.size(); ++s) {
    const auto& st = b.state(s);
    const double v = sol.visits[s];
    if (st.kind != StateKind::kAbsorbing) m.pm1[st.tally] += v;
    if (st.kind == StateKind::kThinking) {
      m.pm6[st.tally] += v * st.think_mean;
      m.pm4 += v * st.think_mean;
    }
    if (st.request) {
      m.requests_by_type[*st.request] += v;
      m.pm8 += v;
    }
  }
  for (const auto& [tally, secs] : m.pm6) {
    m.pm2[tally] = m.pm4 > 0.0 ? secs / m.pm4 : 0.0;
  }
  m.pm3 = sol.p_abandoned_with_items;
  m.pm5 = sol.p_paid;
  m.pm7 = sol.p_abandoned_empty;
  m.items_added = sol.items_added;
  return m;
}

AnalyticSessionMetrics analytic_session_metrics(
    const CbmgGraph& g, const std::vector<CustomerClass>& classes,
    const ScenarioMix& mix, const BehaviorOptions& opts) {
  if (const auto v = mix.violations(); !v.empty()) throw ModelError(v.front());
  AnalyticSessionMetrics total;
  for (std::size_t i = 0; i < mix.classes.size(); ++i) {
    const double w = mix.pmf[i];
    if (w <= 0.0) continue;
    const auto it = std::find_if(classes.begin(), classes.end(), [&](const auto& c) {
      return c.name == mix.classes[i];
    });
    if (it == classes.end()) {
      throw ModelError("mix references unknown class " + mix.classes[i]);
    }
    const auto m = analytic_class_metrics(ClassBehavior(g, *it, opts));
    for (const auto& [k, v] : m.pm1) total.pm1[k] += w * v;
    for (const auto& [k, v] : m.pm6) total.pm6[k] += w * v;
    for (const auto& [k, v] : m.requests_by_type) total.requests_by_type[k] += w * v;
    total.pm3 += w * m.pm3;
    total.pm4 += w * m.pm4;
    total.pm5 += w * m.pm5;
    total.pm7 += w * m.pm7;
    total.pm8 += w * m.pm8;
    total.items_added += w * m.items_added;
  }
  for (const auto& [tally, secs] : total.pm6) {
    total.pm2[tally] = total.pm4 > 0.0 ? secs / total.pm4 : 0.0;
  }
  return total;
}

}  // namespace shopsim

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

#include "shopsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <set>

namespace shopsim {

std::vector<double> SweepRange::lambdas() const {
  std::vector<double> out;
  if (!(step > 0.0) || to < from) return out;
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(from + static_cast<double>(i) * step);
  }
  return out;
}

FarmSpec ScenarioConfig::effective_farm() const {
  FarmSpec f = farm;
  f.routes.fes_enabled = run.fes_enabled;
  return f;
}

std::vector<std::string> ScenarioConfig::violations() const {
  std::vector<std::string> v;
  for (const auto& m : mix.violations()) v.push_back("scenario: " + m);
  const FarmSpec f = effective_farm();
  for (const auto& m : f.violations()) v.push_back("farm: " + m);

  std::set<std::string> class_names;
  for (const auto& c : classes) {
    if (!class_names.insert(c.name).second) {
      v.push_back("classes: duplicate class " + c.name);
    }
  }
  for (const auto& name : mix.classes) {
    const auto it = std::find_if(classes.begin(), classes.end(),
                                 [&](const auto& c) { return c.name == name; });
    if (it == classes.end()) {
      v.push_back("scenario: mix references unknown class " + name);
      continue;
    }
    for (const auto& m : validate_graph(graph, *it, behavior_options())) {
      v.push_back("graph: " + m);
    }
  }
  for (const auto& s : graph.states) {
    if (s.request && !f.routes.routes.count(*s.request)) {
      v.push_back(fmt::format("routes: state {} emits request type {} with no route",
                              s.name, *s.request));
    }
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    v.push_back("scenario: lambda must be >= 0");
  }
  if (!(run.window > 0.0)) v.push_back("run: window must be positive");
  if (!(run.warmup >= 0.0) || !(run.warmup < run.window)) {
    v.push_back("run: warmup must lie in [0, window)");
  }
  if (run.replications < 1) v.push_back("run: replications must be >= 1");
  if (!(run.threshold > 0.0)) v.push_back("run: threshold must be positive");
  if (!(run.unit_value >= 0.0)) v.push_back("run: unit_value must be >= 0");
  if (!(run.queue_sample_interval > 0.0)) {
    v.push_back("run: queue_sample_interval must be positive");
  }
  if (sweep) {
    if (!(sweep->step > 0.0)) v.push_back("sweep: step must be positive");
    if (!(sweep->from >= 0.0) || sweep->to < sweep->from) {
      v.push_back("sweep: need 0 <= from <= to");
    }
  }
  return v;
}

ScenarioConfig preset_scenario(const std::string& name) {
  ScenarioConfig cfg;
  const auto mix = preset_mix(name);
  if (!mix) throw ModelError("unknown scenario preset " + name);
  cfg.name = name;
  cfg.mix = *mix;
  return cfg;
}

AnalyticReport analyze(const ScenarioConfig& cfg) {
  AnalyticReport out;
  const BehaviorOptions opts = cfg.behavior_options();
  out.mix = analytic_session_metrics(cfg.graph, cfg.classes, cfg.mix, opts);
  for (const auto& name : cfg.mix.classes) {
    const auto it = std::find_if(cfg.classes.begin(), cfg.classes.end(),
                                 [&](const auto& c) { return c.name == name; });
    if (it == cfg.classes.end()) throw ModelError("unknown class " + name);
    out.per_class[name] = analytic_class_metrics(ClassBehavior(cfg.graph, *it, opts));
  }
  out.demand = service_demand(cfg.effective_farm(), out.mix.requests_by_type);
  return out;
}

namespace {

class ShopModel final : public EventSink, public RequestObserver {
 public:
  ShopModel(const ScenarioConfig& cfg, double lambda, std::uint64_t seed,
            RunExtras extras)
      : cfg_(cfg),
        extras_(extras),
        arrivals_{lambda, cfg.mix},
        arrival_rng_(seed, StreamId::kArrivals),
        class_rng_(seed, StreamId::kClassDraw),
        transition_rng_(seed, StreamId::kTransitions),
        think_rng_(seed, StreamId::kThinkTimes),
        farm_(sim_, cfg.effective_farm(), seed, this,
              FarmOptions{extras.record_requests, false}) {
    const BehaviorOptions opts = cfg.behavior_options();
    for (const auto& name : cfg.mix.classes) {
      const auto it = std::find_if(cfg.classes.begin(), cfg.classes.end(),
                                   [&](const auto& c) { return c.name == name; });
      if (it == cfg.classes.end()) throw ModelError("unknown class " + name);
      behaviors_.emplace_back(cfg.graph, *it, opts);
    }
    const ClassBehavior& layout = behaviors_.front();
    for (const auto& s : layout.states()) {
      state_type_.push_back(s.request ? farm_.type_index(*s.request) : 0u);
    }
    collector_.emplace(layout, farm_.request_types(),
                       MetricsOptions{cfg.run.happiness, cfg.run.unit_value});
  }

  RunResult run(std::uint64_t seed) {
    const double window = cfg_.run.window;
    const double warmup = cfg_.run.warmup;
    if (arrivals_.lambda > 0.0) {
      sim_.schedule(next_interarrival(arrivals_, arrival_rng_), this, kArrival);
    }
    if (warmup > 0.0) sim_.schedule(warmup, this, kWarmup);
    if (extras_.record_queue) {
      for (std::size_t i = 0; i < farm_.server_count(); ++i) {
        queue_.servers.push_back(farm_.server(i).name());
      }
      sim_.schedule(0.0, this, kSample);
    }

    sim_.run(window);

    // Sessions still open at the window end, in slot order.
    for (std::uint32_t c = 0; c < customers_.size(); ++c) {
      Customer& cu = customers_[c];
      if (!cu.active) continue;
      if (!cu.absorbed) {
        cu.rec.outcome = SessionOutcome::kCutOffByWindow;
        cu.rec.end = window;
      }
      if (cu.measured) collector_->observe_session(cu.rec, cu.rt);
      cu.active = false;
    }

    RunResult out;
    out.seed = seed;
    out.lambda = arrivals_.lambda;
    out.report = collector_->finalize_report(window - warmup, &farm_, window);
    out.queue = std::move(queue_);
    out.requests = std::move(log_);
    out.events = sim_.dispatched();
    return out;
  }

  void on_event(std::uint64_t payload) override {
    switch (payload & 3) {
      case kArrival: return arrive();
      case kThinkDone: return think_done(static_cast<std::uint32_t>(payload >> 2));
      case kSample: return sample();
      case kWarmup: return warm_up();
    }
  }

  void request_done(const Request& r) override {
    Customer& cu = customers_[r.session];
    const double rt = r.response_time();
    if (r.issued_at >= cfg_.run.warmup) collector_->observe_request(r);
    cu.rt.add(rt);
    if (cfg_.run.sojourn_includes_response) cu.rec.sojourn[r.tag] += rt;
    if (extras_.record_requests) {
      log_.push_back({r.id, farm_.request_types()[r.type], cu.session_id,
                      r.issued_at, r.completed_at, r.wan_out, r.wait, r.service,
                      r.wan_in, r.hops});
    }
    if (--cu.pending == 0 && cu.absorbed) finish(r.session);
  }

 private:
  enum Kind : std::uint64_t { kArrival = 0, kThinkDone = 1, kSample = 2, kWarmup = 3 };

  struct Customer {
    std::size_t cls = 0;
    std::uint64_t session_id = 0;
    SessionRecord rec;
    SessionResponse rt;
    std::uint32_t pending = 0;
    std::size_t state = 0;
    double think = 0.0;
    bool absorbed = false;
    bool measured = false;
    bool active = false;
  };

  void arrive() {
    sim_.schedule_in(next_interarrival(arrivals_, arrival_rng_), this, kArrival);
    std::uint32_t c;
    if (!free_.empty()) {
      c = free_.back();
      free_.pop_back();
    } else {
      c = static_cast<std::uint32_t>(customers_.size());
      customers_.emplace_back();
    }
    Customer& cu = customers_[c];
    cu.cls = draw_class_index(cfg_.mix, class_rng_);
    cu.session_id = next_session_++;
    const ClassBehavior& b = behaviors_[cu.cls];
    cu.rec.reset(b, sim_.now());
    cu.rt = {};
    cu.pending = 0;
    cu.absorbed = false;
    cu.active = true;
    cu.measured = sim_.now() >= cfg_.run.warmup;
    if (cu.measured) collector_->session_started();
    settle(c, advance(c, b.entry()));
  }

  std::size_t advance(std::uint32_t c, std::size_t from) {
    Customer& cu = customers_[c];
    return advance_session(behaviors_[cu.cls], cu.rec, from, transition_rng_,
                           [&](std::size_t s) { emit(c, s); });
  }

  void emit(std::uint32_t c, std::size_t state) {
    Customer& cu = customers_[c];
    const auto id = farm_.serve_request(state_type_[state], c,
                                        static_cast<std::uint32_t>(state));
    cu.rec.requests.push_back(id);
    ++cu.pending;
  }

  // Parks the customer in `state`: thinking, or absorbed.
  void settle(std::uint32_t c, std::size_t state) {
    Customer& cu = customers_[c];
    const ClassBehavior& b = behaviors_[cu.cls];
    cu.state = state;
    if (b.absorbing(state)) {
      cu.absorbed = true;
      cu.rec.end = sim_.now();
      if (cu.pending == 0) finish(c);
      return;
    }
    cu.think = sample_exponential(think_rng_, b.state(state).think_mean);
    sim_.schedule_in(cu.think, this, (std::uint64_t{c} << 2) | kThinkDone);
  }

  void think_done(std::uint32_t c) {
    Customer& cu = customers_[c];
    const ClassBehavior& b = behaviors_[cu.cls];
    const std::size_t s = cu.state;
    cu.rec.sojourn[s] += cu.think;
    if (b.state(s).request) emit(c, s);
    if (++cu.rec.transitions > b.options().max_transitions) {
      throw ModelError("session of class " + b.class_name() +
                       " exceeded the transition cap");
    }
    settle(c, advance(c, sample_transition(b, s, cu.rec.items_added, transition_rng_)));
  }

  void finish(std::uint32_t c) {
    Customer& cu = customers_[c];
    if (cu.measured) collector_->observe_session(cu.rec, cu.rt);
    cu.active = false;
    free_.push_back(c);
  }

  void sample() {
    queue_.times.push_back(sim_.now());
    std::vector<std::uint32_t> row;
    row.reserve(farm_.server_count());
    for (std::size_t i = 0; i < farm_.server_count(); ++i) {
      row.push_back(static_cast<std::uint32_t>(farm_.server(i).queue_length()));
    }
    queue_.lengths.push_back(std::move(row));
    const double next = sim_.now() + cfg_.run.queue_sample_interval;
    if (next <= cfg_.run.window) sim_.schedule(next, this, kSample);
  }

  void warm_up() {
    for (std::size_t i = 0; i < farm_.server_count(); ++i) {
      farm_.server(i).reset_stats();
    }
  }

  const ScenarioConfig& cfg_;
  RunExtras extras_;
  Simulator sim_;
  ArrivalProcess arrivals_;
  RngStream arrival_rng_;
  RngStream class_rng_;
  RngStream transition_rng_;
  RngStream think_rng_;
  ServerFarm farm_;
  std::vector<ClassBehavior> behaviors_;
  std::vector<std::uint32_t> state_type_;
  std::optional<MetricsCollector> collector_;

  std::vector<Customer> customers_;
  std::vector<std::uint32_t> free_;
  std::uint64_t next_session_ = 0;
  QueueSeries queue_;
  std::vector<RequestLogRow> log_;
};

}  // namespace

RunResult run_replication(const ScenarioConfig& cfg, double lambda,
                          std::uint64_t seed, RunExtras extras) {
  if (const auto v = cfg.violations(); !v.empty()) {
    throw ModelError("invalid scenario: " + v.front());
  }
  if (!(lambda >= 0.0)) throw ModelError("lambda must be >= 0");
  ShopModel model(cfg, lambda, seed, extras);
  return model.run(seed);
}

}  // namespace shopsim

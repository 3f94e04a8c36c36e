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

#ifndef SHOPSIM_METRICS_HPP_
#define SHOPSIM_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shopsim/behavior.hpp"
#include "shopsim/farm.hpp"

namespace shopsim {

struct RtStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

// Linear interpolation between order statistics at h = (n - 1) p.
double percentile_sorted(std::span<const double> sorted, double p);
RtStats summarize(std::vector<double> samples);

enum class HappinessRule { kMeanRt, kMaxRt };

std::string_view to_string(HappinessRule r);
std::optional<HappinessRule> parse_happiness_rule(std::string_view s);

// Customers bucketed by experienced response time: < 2 s, 2..4 s, > 4 s.
struct HappinessBuckets {
  std::uint64_t customers = 0;
  double lt2 = 0.0;
  double from2to4 = 0.0;
  double gt4 = 0.0;
};

struct ServerStats {
  std::string name;
  std::uint64_t arrivals = 0;
  std::uint64_t completions = 0;
  double throughput = 0.0;   // completions per second
  double utilization = 0.0;  // busy fraction
  double mean_queue = 0.0;   // time-weighted waiting jobs
  std::size_t max_queue = 0;
};

// Session-level metrics over sessions absorbed inside the window, except
// pm9 which is relative to all started sessions.
struct SessionMetrics {
  std::uint64_t started = 0;
  std::uint64_t completed = 0;
  std::uint64_t cut_off = 0;
  std::map<std::string, double> pm1;  // mean visits per tally name
  std::map<std::string, double> pm2;  // sojourn fraction, thinking states
  double pm3 = 0.0;  // left with items in the cart
  double pm4 = 0.0;  // mean session length (seconds)
  double pm5 = 0.0;  // buy-to-visit ratio
  std::map<std::string, double> pm6;  // mean sojourn seconds per tally
  double pm7 = 0.0;  // ended with an empty cart and no purchase
  double pm8 = 0.0;  // mean requests per session
  double pm9 = 0.0;  // fraction of started sessions that completed
  double pm10 = 0.0;  // items paid per session
  double pm11 = 0.0;  // items abandoned per session
  double items_added = 0.0;
  double revenue_throughput = 0.0;         // currency per second
  double potential_loss_throughput = 0.0;  // currency per second
};

struct MetricsReport {
  double window = 0.0;  // measured seconds (run length minus warm-up)
  RtStats overall;
  std::map<std::string, RtStats> by_type;
  HappinessBuckets buckets;
  std::vector<ServerStats> servers;
  SessionMetrics sessions;
  bool degenerate = false;  // no completed sessions
  std::vector<std::string> law_violations;
};

struct MetricsOptions {
  HappinessRule happiness = HappinessRule::kMeanRt;
  double unit_value = 1.0;
};

// Response-time summary of one customer's completed requests.
struct SessionResponse {
  std::uint32_t count = 0;
  double sum = 0.0;
  double max = 0.0;

  void add(double rt) {
    ++count;
    sum += rt;
    if (rt > max) max = rt;
  }
};

class MetricsCollector {
 public:
  // `layout` fixes the state indexing shared by every class of the graph.
  MetricsCollector(const ClassBehavior& layout,
                   std::vector<std::string> request_types,
                   MetricsOptions opts = {});

  void observe_request(const Request& r);
  void session_started() { ++started_; }
  void observe_session(const SessionRecord& rec, const SessionResponse& rt);

  // `farm` may be null for behaviour-only runs. `until` closes the server
  // accumulators.
  MetricsReport finalize_report(double window, const ServerFarm* farm,
                                SimTime until) const;

 private:
  struct StateInfo {
    std::string tally;
    bool thinking;
    bool absorbing;
    bool emits;
  };

  MetricsOptions opts_;
  std::vector<StateInfo> states_;
  std::vector<std::string> types_;
  std::vector<std::vector<double>> rt_by_type_;

  std::uint64_t started_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t cut_off_ = 0;
  std::vector<std::uint64_t> visits_;
  std::vector<double> sojourn_;
  std::uint64_t requests_ = 0;
  std::uint64_t items_added_ = 0;
  std::uint64_t items_paid_ = 0;
  std::uint64_t items_abandoned_ = 0;
  std::uint64_t paid_ = 0;
  std::uint64_t abandoned_with_items_ = 0;
  std::uint64_t abandoned_empty_ = 0;
  std::uint64_t bucket_[3] = {0, 0, 0};
};

// The exact-by-construction laws: PM4 = sum PM6, PM8 = sum PM1 over
// request-emitting states, PM10 + PM11 = items added, PM3 + PM5 + PM7 = 1.
std::vector<std::string> check_consistency(const MetricsReport& r,
                                           const std::vector<std::string>& emitting_tallies);

}  // namespace shopsim

#endif  // SHOPSIM_METRICS_HPP_

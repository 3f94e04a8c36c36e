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

#include "shopsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <numeric>

namespace shopsim {

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

RtStats summarize(std::vector<double> samples) {
  RtStats s;
  s.count = samples.size();
  if (samples.empty()) {
    s.mean = s.p50 = s.p95 = s.p99 = s.max = std::nan("");
    return s;
  }
  std::sort(samples.begin(), samples.end());
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
           static_cast<double>(samples.size());
  s.p50 = percentile_sorted(samples, 0.50);
  s.p95 = percentile_sorted(samples, 0.95);
  s.p99 = percentile_sorted(samples, 0.99);
  s.max = samples.back();
  return s;
}

std::string_view to_string(HappinessRule r) {
  return r == HappinessRule::kMeanRt ? "mean" : "max";
}

std::optional<HappinessRule> parse_happiness_rule(std::string_view s) {
  if (s == "mean") return HappinessRule::kMeanRt;
  if (s == "max") return HappinessRule::kMaxRt;
  return std::nullopt;
}

MetricsCollector::MetricsCollector(const ClassBehavior& layout,
                                   std::vector<std::string> request_types,
                                   MetricsOptions opts)
    : opts_(opts), types_(std::move(request_types)) {
  for (const auto& s : layout.states()) {
    states_.push_back({s.tally, s.kind == StateKind::kThinking,
                       s.kind == StateKind::kAbsorbing, s.request.has_value()});
  }
  visits_.assign(states_.size(), 0);
  sojourn_.assign(states_.size(), 0.0);
  rt_by_type_.resize(types_.size());
}

void MetricsCollector::observe_request(const Request& r) {
  rt_by_type_.at(r.type).push_back(r.response_time());
}

void MetricsCollector::observe_session(const SessionRecord& rec,
                                       const SessionResponse& rt) {
  if (rt.count > 0) {
    const double x = opts_.happiness == HappinessRule::kMeanRt
                         ? rt.sum / static_cast<double>(rt.count)
                         : rt.max;
    ++bucket_[x < 2.0 ? 0 : (x <= 4.0 ? 1 : 2)];
  }
  if (rec.outcome == SessionOutcome::kCutOffByWindow) {
    ++cut_off_;
    return;
  }
  ++completed_;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    visits_[i] += rec.visits[i];
    sojourn_[i] += rec.sojourn[i];
  }
  requests_ += rec.requests.size();
  items_added_ += rec.items_added;
  switch (rec.outcome) {
    case SessionOutcome::kPaid:
      ++paid_;
      items_paid_ += rec.items_paid;
      break;
    case SessionOutcome::kAbandonedWithItems:
      ++abandoned_with_items_;
      items_abandoned_ += rec.items_added;
      break;
    case SessionOutcome::kAbandonedEmpty:
      ++abandoned_empty_;
      break;
    case SessionOutcome::kCutOffByWindow:
      break;
  }
}

MetricsReport MetricsCollector::finalize_report(double window,
                                                const ServerFarm* farm,
                                                SimTime until) const {
  MetricsReport r;
  r.window = window;

  std::vector<double> all;
  for (std::size_t t = 0; t < types_.size(); ++t) {
    all.insert(all.end(), rt_by_type_[t].begin(), rt_by_type_[t].end());
    r.by_type[types_[t]] = summarize(rt_by_type_[t]);
  }
  r.overall = summarize(std::move(all));

  const std::uint64_t customers = bucket_[0] + bucket_[1] + bucket_[2];
  r.buckets.customers = customers;
  if (customers > 0) {
    const auto n = static_cast<double>(customers);
    r.buckets.lt2 = static_cast<double>(bucket_[0]) / n;
    r.buckets.from2to4 = static_cast<double>(bucket_[1]) / n;
    r.buckets.gt4 = static_cast<double>(bucket_[2]) / n;
  }

  if (farm != nullptr) {
    for (std::size_t i = 0; i < farm->server_count(); ++i) {
      const FifoResource& s = farm->server(i);
      const double span = until - s.stats_start();
      ServerStats st;
      st.name = s.name();
      st.arrivals = s.arrivals();
      st.completions = s.completions();
      if (span > 0.0) {
        st.throughput = static_cast<double>(s.completions()) / span;
        st.utilization = std::clamp(s.busy_time(until) / span, 0.0, 1.0);
        st.mean_queue = s.queue_area(until) / span;
      }
      st.max_queue = s.max_queue_length();
      r.servers.push_back(st);
    }
  }

  SessionMetrics& m = r.sessions;
  m.started = started_;
  m.completed = completed_;
  m.cut_off = cut_off_;
  m.pm9 = started_ > 0 ? static_cast<double>(completed_) / static_cast<double>(started_)
                       : 0.0;
  r.degenerate = completed_ == 0;
  if (completed_ > 0) {
    const auto n = static_cast<double>(completed_);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (states_[i].absorbing) continue;
      m.pm1[states_[i].tally] += static_cast<double>(visits_[i]) / n;
      if (states_[i].thinking) {
        m.pm6[states_[i].tally] += sojourn_[i] / n;
      }
    }
    for (const auto& [tally, secs] : m.pm6) m.pm4 += secs;
    for (const auto& [tally, secs] : m.pm6) {
      m.pm2[tally] = m.pm4 > 0.0 ? secs / m.pm4 : 0.0;
    }
    m.pm3 = static_cast<double>(abandoned_with_items_) / n;
    m.pm5 = static_cast<double>(paid_) / n;
    m.pm7 = static_cast<double>(abandoned_empty_) / n;
    m.pm8 = static_cast<double>(requests_) / n;
    m.pm10 = static_cast<double>(items_paid_) / n;
    m.pm11 = static_cast<double>(items_abandoned_) / n;
    m.items_added = static_cast<double>(items_added_) / n;
  }
  if (window > 0.0) {
    const auto c = static_cast<double>(completed_);
    m.revenue_throughput = m.pm10 * c * opts_.unit_value / window;
    m.potential_loss_throughput = m.pm11 * c * opts_.unit_value / window;
  }

  std::vector<std::string> emitting;
  for (const auto& s : states_) {
    if (s.emits && std::find(emitting.begin(), emitting.end(), s.tally) == emitting.end()) {
      emitting.push_back(s.tally);
    }
  }
  r.law_violations = check_consistency(r, emitting);
  return r;
}

std::vector<std::string> check_consistency(
    const MetricsReport& r, const std::vector<std::string>& emitting_tallies) {
  std::vector<std::string> out;
  const SessionMetrics& m = r.sessions;
  if (m.completed == 0) return out;
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  double pm6_sum = 0.0;
  for (const auto& [k, v] : m.pm6) pm6_sum += v;
  if (!close(m.pm4, pm6_sum)) {
    out.push_back(fmt::format("PM4 {} != sum PM6 {}", m.pm4, pm6_sum));
  }
  double emitted = 0.0;
  for (const auto& t : emitting_tallies) {
    if (auto it = m.pm1.find(t); it != m.pm1.end()) emitted += it->second;
  }
  if (!close(m.pm8, emitted)) {
    out.push_back(fmt::format("PM8 {} != sum PM1 over request states {}", m.pm8, emitted));
  }
  if (!close(m.pm10 + m.pm11, m.items_added)) {
    out.push_back(fmt::format("PM10 + PM11 {} != items added {}", m.pm10 + m.pm11,
                              m.items_added));
  }
  if (!close(m.pm3 + m.pm5 + m.pm7, 1.0)) {
    out.push_back(fmt::format("PM3 + PM5 + PM7 = {}", m.pm3 + m.pm5 + m.pm7));
  }
  return out;
}

}  // namespace shopsim

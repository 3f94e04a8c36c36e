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

#include "shopsim/planner.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <exception>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shopsim {

std::vector<std::string> SweepSpec::violations() const {
  std::vector<std::string> v = scenario.violations();
  if (!(range.step > 0.0)) v.push_back("sweep: step must be positive");
  if (!(range.from >= 0.0) || range.to < range.from) {
    v.push_back("sweep: need 0 <= from <= to");
  }
  if (!(window > 0.0)) v.push_back("sweep: window must be positive");
  if (replications < 1) v.push_back("sweep: replications must be >= 1");
  if (!(threshold > 0.0)) v.push_back("sweep: threshold must be positive");
  return v;
}

SweepSpec sweep_spec_from(const ScenarioConfig& cfg) {
  SweepSpec s;
  s.scenario = cfg;
  s.range = cfg.sweep.value_or(SweepRange{});
  s.window = cfg.run.window;
  s.replications = cfg.run.replications;
  s.master_seed = cfg.run.seed;
  s.threshold = cfg.run.threshold;
  return s;
}

std::vector<std::uint64_t> replication_seeds(std::uint64_t master, int n) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n; ++i) {
    seeds.push_back(derive_seed(master, static_cast<std::uint64_t>(i)));
  }
  return seeds;
}

ReplicationSummary summarize_replication(const RunResult& r) {
  const MetricsReport& m = r.report;
  ReplicationSummary s;
  s.seed = r.seed;
  s.requests = m.overall.count;
  s.degenerate = m.overall.count == 0;
  s.mean_rt = s.degenerate ? std::nan("") : m.overall.mean;
  s.lt2 = m.buckets.lt2;
  s.from2to4 = m.buckets.from2to4;
  s.gt4 = m.buckets.gt4;
  for (const auto& srv : m.servers) {
    s.utilization.push_back(srv.utilization);
    s.throughput.push_back(srv.throughput);
  }
  const SessionMetrics& p = m.sessions;
  s.pm = {{"PM3", p.pm3},   {"PM4", p.pm4},   {"PM5", p.pm5},
          {"PM7", p.pm7},   {"PM8", p.pm8},   {"PM9", p.pm9},
          {"PM10", p.pm10}, {"PM11", p.pm11}};
  for (const auto& [k, v] : p.pm1) s.pm["PM1." + k] = v;
  s.law_violations = m.law_violations.size();
  return s;
}

std::pair<double, double> mean_and_ci95(std::span<const double> xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, std::nan("")};
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return {mean, t * sd / std::sqrt(n)};
}

SweepPoint aggregate_point(double lambda, std::span<const ReplicationSummary> reps) {
  SweepPoint p;
  p.lambda = lambda;
  p.replications = static_cast<int>(reps.size());
  std::vector<double> rts;
  std::size_t usable = 0;
  for (const auto& r : reps) {
    p.law_violations += r.law_violations;
    if (r.degenerate) {
      ++p.degenerate_replications;
      continue;
    }
    ++usable;
    rts.push_back(r.mean_rt);
    p.lt2 += r.lt2;
    p.from2to4 += r.from2to4;
    p.gt4 += r.gt4;
    if (p.utilization.empty()) {
      p.utilization.assign(r.utilization.size(), 0.0);
      p.throughput.assign(r.throughput.size(), 0.0);
    }
    for (std::size_t i = 0; i < r.utilization.size(); ++i) {
      p.utilization[i] += r.utilization[i];
      p.throughput[i] += r.throughput[i];
    }
    for (const auto& [k, v] : r.pm) p.pm[k] += v;
  }
  p.degenerate = usable == 0;
  if (p.degenerate) {
    p.mean_rt = p.ci = std::nan("");
    if (!reps.empty()) {
      p.utilization.assign(reps.front().utilization.size(), 0.0);
      p.throughput.assign(reps.front().throughput.size(), 0.0);
    }
    return p;
  }
  const auto n = static_cast<double>(usable);
  std::tie(p.mean_rt, p.ci) = mean_and_ci95(rts);
  p.lt2 /= n;
  p.from2to4 /= n;
  p.gt4 /= n;
  for (auto& u : p.utilization) u /= n;
  for (auto& t : p.throughput) t /= n;
  for (auto& [k, v] : p.pm) v /= n;
  return p;
}

SweepPoint run_point(const ScenarioConfig& cfg, double lambda, double window,
                     std::span<const std::uint64_t> seeds) {
  ScenarioConfig c = cfg;
  c.run.window = window;
  std::vector<ReplicationSummary> reps;
  for (const auto seed : seeds) {
    reps.push_back(summarize_replication(run_replication(c, lambda, seed)));
  }
  return aggregate_point(lambda, reps);
}

namespace {

SweepCurve assemble(const SweepSpec& spec, const std::vector<double>& lambdas,
                    const std::vector<ReplicationSummary>& results) {
  SweepCurve curve;
  curve.scenario = spec.scenario.name;
  for (const auto& s : spec.scenario.farm.servers) curve.servers.push_back(s.name);
  const auto r = static_cast<std::size_t>(spec.replications);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    curve.points.push_back(aggregate_point(
        lambdas[i], std::span<const ReplicationSummary>(results).subspan(i * r, r)));
  }
  return curve;
}

ScenarioConfig point_config(const SweepSpec& spec) {
  if (const auto v = spec.violations(); !v.empty()) {
    throw ModelError("invalid sweep: " + v.front());
  }
  ScenarioConfig c = spec.scenario;
  c.run.window = spec.window;
  return c;
}

}  // namespace

SweepCurve run_sweep_serial(const SweepSpec& spec) {
  const ScenarioConfig cfg = point_config(spec);
  const auto lambdas = spec.range.lambdas();
  const auto seeds = replication_seeds(spec.master_seed, spec.replications);
  std::vector<ReplicationSummary> results;
  results.reserve(lambdas.size() * seeds.size());
  for (const double lambda : lambdas) {
    for (const auto seed : seeds) {
      results.push_back(summarize_replication(run_replication(cfg, lambda, seed)));
    }
  }
  return assemble(spec, lambdas, results);
}

SweepCurve run_sweep(const SweepSpec& spec) {
  const ScenarioConfig cfg = point_config(spec);
  const auto lambdas = spec.range.lambdas();
  const auto seeds = replication_seeds(spec.master_seed, spec.replications);
  const std::size_t r = seeds.size();
  const auto tasks = static_cast<long>(lambdas.size() * r);
  std::vector<ReplicationSummary> results(static_cast<std::size_t>(tasks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));

  // Heaviest points (largest lambda) first for better load balance.
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < tasks; ++k) {
    const auto task = static_cast<std::size_t>(tasks - 1 - k);
    try {
      results[task] = summarize_replication(
          run_replication(cfg, lambdas[task / r], seeds[task % r]));
    } catch (...) {
      errors[task] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return assemble(spec, lambdas, results);
}

std::string_view to_string(CriticalLambda::Status s) {
  switch (s) {
    case CriticalLambda::Status::kCrossed: return "crossed";
    case CriticalLambda::Status::kNotCrossed: return "not_crossed";
    case CriticalLambda::Status::kBelowRange: return "below_range";
  }
  return "?";
}

CriticalLambda critical_lambda(const SweepCurve& curve, double threshold) {
  CriticalLambda out;
  std::vector<const SweepPoint*> pts;
  for (const auto& p : curve.points) {
    if (!p.degenerate && std::isfinite(p.mean_rt)) pts.push_back(&p);
  }
  if (pts.empty()) return out;
  if (pts.front()->mean_rt > threshold) {
    out.status = CriticalLambda::Status::kBelowRange;
    out.lambda = pts.front()->lambda;
    return out;
  }
  int crossings = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const SweepPoint& a = *pts[i];
    const SweepPoint& b = *pts[i + 1];
    if (a.mean_rt <= threshold && b.mean_rt > threshold) {
      if (crossings++ == 0) {
        out.status = CriticalLambda::Status::kCrossed;
        out.lambda = a.lambda + (threshold - a.mean_rt) * (b.lambda - a.lambda) /
                                    (b.mean_rt - a.mean_rt);
      }
    }
  }
  out.multiple_crossings = crossings > 1;
  return out;
}

ScenarioComparison compare_curves(const std::vector<SweepSpec>& specs,
                                  const std::vector<SweepCurve>& curves) {
  if (specs.size() != curves.size()) {
    throw std::invalid_argument("compare_curves: one curve per spec");
  }
  ScenarioComparison cmp;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ComparisonRow row;
    row.scenario = specs[i].scenario.name;
    row.crit = critical_lambda(curves[i], specs[i].threshold);
    const AnalyticReport a = analyze(specs[i].scenario);
    row.demand = a.demand;
    row.total_demand = std::accumulate(a.demand.demand.begin(), a.demand.demand.end(), 0.0);
    row.analytic = a.mix;
    cmp.rows.push_back(std::move(row));
  }
  // Ordering by bottleneck demand must invert the ordering of crossed rates.
  for (const auto& x : cmp.rows) {
    for (const auto& y : cmp.rows) {
      if (x.crit.status != CriticalLambda::Status::kCrossed ||
          y.crit.status != CriticalLambda::Status::kCrossed) {
        continue;
      }
      if (x.demand.max_demand > y.demand.max_demand && x.crit.lambda > y.crit.lambda) {
        cmp.ordering_consistent = false;
      }
    }
  }
  return cmp;
}

ScenarioComparison compare_scenarios(const std::vector<SweepSpec>& specs) {
  if (specs.size() < 2) {
    throw std::invalid_argument("compare_scenarios needs at least two sweeps");
  }
  std::vector<SweepCurve> curves;
  for (const auto& s : specs) curves.push_back(run_sweep(s));
  return compare_curves(specs, curves);
}

}  // namespace shopsim

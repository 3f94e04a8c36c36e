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

// Arrival-rate sweeps, replication aggregation and critical-rate search.
//
// Replications are independent kernel instances. run_sweep() spreads them
// over OpenMP threads; run_sweep_serial() is the single-threaded reference
// and must produce an identical curve.

#ifndef SHOPSIM_PLANNER_HPP_
#define SHOPSIM_PLANNER_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shopsim/model.hpp"

namespace shopsim {

struct SweepSpec {
  ScenarioConfig scenario;
  SweepRange range;
  double window = 7200.0;
  int replications = 5;
  std::uint64_t master_seed = 20130901;
  double threshold = 4.0;

  std::vector<std::string> violations() const;
};

// Sweep settings from the scenario's sweep and run sections.
SweepSpec sweep_spec_from(const ScenarioConfig& cfg);

// Seeds for replications 0..n-1; every sweep point reuses the same seeds.
std::vector<std::uint64_t> replication_seeds(std::uint64_t master, int n);

// What a sweep keeps from one replication.
struct ReplicationSummary {
  std::uint64_t seed = 0;
  bool degenerate = true;  // no completed requests
  double mean_rt = 0.0;
  std::uint64_t requests = 0;
  double lt2 = 0.0;
  double from2to4 = 0.0;
  double gt4 = 0.0;
  std::vector<double> utilization;
  std::vector<double> throughput;
  std::map<std::string, double> pm;  // PM3..PM11 scalars, PM1.<state>
  std::size_t law_violations = 0;
};

ReplicationSummary summarize_replication(const RunResult& r);

struct SweepPoint {
  double lambda = 0.0;
  int replications = 0;
  int degenerate_replications = 0;
  bool degenerate = true;  // mean_rt undefined
  double mean_rt = 0.0;
  double ci = 0.0;  // 95% half-width; NaN with one usable replication
  double lt2 = 0.0;
  double from2to4 = 0.0;
  double gt4 = 0.0;
  std::vector<double> utilization;
  std::vector<double> throughput;
  std::map<std::string, double> pm;
  std::size_t law_violations = 0;
};

// Mean and Student-t 95% half-width, NaN half-width for fewer than 2 values.
std::pair<double, double> mean_and_ci95(std::span<const double> xs);

SweepPoint aggregate_point(double lambda,
                           std::span<const ReplicationSummary> reps);

struct SweepCurve {
  std::string scenario;
  std::vector<std::string> servers;
  std::vector<SweepPoint> points;
};

// One point: len(seeds) replications run in order on this thread.
SweepPoint run_point(const ScenarioConfig& cfg, double lambda, double window,
                     std::span<const std::uint64_t> seeds);

SweepCurve run_sweep(const SweepSpec& spec);
SweepCurve run_sweep_serial(const SweepSpec& spec);

struct CriticalLambda {
  enum class Status { kCrossed, kNotCrossed, kBelowRange };
  Status status = Status::kNotCrossed;
  double lambda = 0.0;
  bool multiple_crossings = false;
};

std::string_view to_string(CriticalLambda::Status s);

// First upward crossing of `threshold` by the replication-mean response
// time, located by linear interpolation. Degenerate points are skipped.
CriticalLambda critical_lambda(const SweepCurve& curve, double threshold);

struct ComparisonRow {
  std::string scenario;
  CriticalLambda crit;
  ServiceDemand demand;
  double total_demand = 0.0;
  AnalyticSessionMetrics analytic;
};

struct ScenarioComparison {
  std::vector<ComparisonRow> rows;
  // Critical rates fall as bottleneck demand rises.
  bool ordering_consistent = true;
};

ScenarioComparison compare_curves(const std::vector<SweepSpec>& specs,
                                  const std::vector<SweepCurve>& curves);
ScenarioComparison compare_scenarios(const std::vector<SweepSpec>& specs);

}  // namespace shopsim

#endif  // SHOPSIM_PLANNER_HPP_

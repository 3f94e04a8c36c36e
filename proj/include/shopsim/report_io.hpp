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

// CSV and JSON exporters. Numbers are printed with round-trip precision so
// identical runs give byte-identical files. NaN is written as "nan" in CSV
// and null in JSON.

#ifndef SHOPSIM_REPORT_IO_HPP_
#define SHOPSIM_REPORT_IO_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shopsim/model.hpp"
#include "shopsim/planner.hpp"

namespace shopsim {

std::string format_number(double x);

nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const AnalyticSessionMetrics& a);
nlohmann::json to_json(const ServiceDemand& d);
nlohmann::json to_json(const AnalyticReport& a);

nlohmann::json run_summary(const ScenarioConfig& cfg, const RunResult& r);

void write_requests_csv(std::ostream& out, const std::vector<RequestLogRow>& rows,
                        const std::vector<std::string>& servers);
void write_queue_csv(std::ostream& out, const QueueSeries& q);

// lambda, mean_rt, ci, bucket_lt2, bucket_2to4, bucket_gt4, util_<s>..., thr_<s>...
void write_curve_csv(std::ostream& out, const SweepCurve& curve);
// Reads back what write_curve_csv wrote.
SweepCurve read_curve_csv(std::istream& in, const std::string& scenario = "");

nlohmann::json sweep_summary(const SweepSpec& spec, const SweepCurve& curve,
                             const CriticalLambda& crit);

nlohmann::json to_json(const ScenarioComparison& c);

// Atomic-ish write: to `path`.tmp then rename.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace shopsim

#endif  // SHOPSIM_REPORT_IO_HPP_

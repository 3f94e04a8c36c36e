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

#include "shopsim/report_io.hpp"

#include <fmt/core.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "shopsim/config.hpp"

namespace shopsim {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json num_map(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = num(v);
  return j;
}

json rt_json(const RtStats& s) {
  return {{"count", s.count}, {"mean", num(s.mean)}, {"p50", num(s.p50)},
          {"p95", num(s.p95)}, {"p99", num(s.p99)},   {"max", num(s.max)}};
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number in CSV: " + s);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

json to_json(const MetricsReport& r) {
  json by_type = json::object();
  for (const auto& [k, v] : r.by_type) by_type[k] = rt_json(v);
  json servers = json::array();
  for (const auto& s : r.servers) {
    servers.push_back({{"name", s.name},
                       {"arrivals", s.arrivals},
                       {"completions", s.completions},
                       {"throughput", num(s.throughput)},
                       {"utilization", num(s.utilization)},
                       {"mean_queue", num(s.mean_queue)},
                       {"max_queue", s.max_queue}});
  }
  const SessionMetrics& p = r.sessions;
  json sessions = {{"started", p.started},
                   {"completed", p.completed},
                   {"cut_off", p.cut_off},
                   {"PM1", num_map(p.pm1)},
                   {"PM2", num_map(p.pm2)},
                   {"PM3", num(p.pm3)},
                   {"PM4", num(p.pm4)},
                   {"PM5", num(p.pm5)},
                   {"PM6", num_map(p.pm6)},
                   {"PM7", num(p.pm7)},
                   {"PM8", num(p.pm8)},
                   {"PM9", num(p.pm9)},
                   {"PM10", num(p.pm10)},
                   {"PM11", num(p.pm11)},
                   {"items_added", num(p.items_added)},
                   {"revenue_throughput", num(p.revenue_throughput)},
                   {"potential_loss_throughput", num(p.potential_loss_throughput)}};
  return {{"window", r.window},
          {"response_time", rt_json(r.overall)},
          {"response_time_by_type", by_type},
          {"happiness",
           {{"customers", r.buckets.customers},
            {"lt2", num(r.buckets.lt2)},
            {"2to4", num(r.buckets.from2to4)},
            {"gt4", num(r.buckets.gt4)}}},
          {"servers", servers},
          {"sessions", sessions},
          {"degenerate", r.degenerate},
          {"law_violations", r.law_violations}};
}

json to_json(const AnalyticSessionMetrics& a) {
  return {{"PM1", num_map(a.pm1)},  {"PM2", num_map(a.pm2)}, {"PM3", num(a.pm3)},
          {"PM4", num(a.pm4)},      {"PM5", num(a.pm5)},     {"PM6", num_map(a.pm6)},
          {"PM7", num(a.pm7)},      {"PM8", num(a.pm8)},
          {"items_added", num(a.items_added)},
          {"requests_by_type", num_map(a.requests_by_type)}};
}

json to_json(const ServiceDemand& d) {
  json per = json::object();
  for (std::size_t i = 0; i < d.servers.size(); ++i) per[d.servers[i]] = num(d.demand[i]);
  return {{"demand", per},
          {"bottleneck", d.bottleneck},
          {"max_demand", num(d.max_demand)},
          {"lambda_sat", num(d.lambda_sat)}};
}

json to_json(const AnalyticReport& a) {
  json per = json::object();
  for (const auto& [k, v] : a.per_class) per[k] = to_json(v);
  return {{"mix", to_json(a.mix)}, {"per_class", per}, {"service_demand", to_json(a.demand)}};
}

json run_summary(const ScenarioConfig& cfg, const RunResult& r) {
  return {{"scenario", cfg.name},
          {"config_fingerprint", config_fingerprint(cfg)},
          {"seed", r.seed},
          {"lambda", r.lambda},
          {"window", cfg.run.window},
          {"warmup", cfg.run.warmup},
          {"events", r.events},
          {"metrics", to_json(r.report)}};
}

void write_requests_csv(std::ostream& out, const std::vector<RequestLogRow>& rows,
                        const std::vector<std::string>& servers) {
  out << "id,type,session,issued_at,completed_at,response_time,wan_out,wait,service,"
         "wan_in,path\n";
  for (const auto& r : rows) {
    std::string path;
    for (const auto& h : r.hops) {
      if (!path.empty()) path += '>';
      path += h.server < servers.size() ? servers[h.server] : std::to_string(h.server);
    }
    out << r.id << ',' << r.type << ',' << r.session << ',' << format_number(r.issued_at)
        << ',' << format_number(r.completed_at) << ','
        << format_number(r.completed_at - r.issued_at) << ',' << format_number(r.wan_out)
        << ',' << format_number(r.wait) << ',' << format_number(r.service) << ','
        << format_number(r.wan_in) << ',' << path << '\n';
  }
}

void write_queue_csv(std::ostream& out, const QueueSeries& q) {
  out << "time";
  for (const auto& s : q.servers) out << ",q_" << s;
  out << '\n';
  for (std::size_t i = 0; i < q.times.size(); ++i) {
    out << format_number(q.times[i]);
    for (const auto len : q.lengths[i]) out << ',' << len;
    out << '\n';
  }
}

void write_curve_csv(std::ostream& out, const SweepCurve& curve) {
  out << "lambda,mean_rt,ci,bucket_lt2,bucket_2to4,bucket_gt4";
  for (const auto& s : curve.servers) out << ",util_" << s;
  for (const auto& s : curve.servers) out << ",thr_" << s;
  out << '\n';
  for (const auto& p : curve.points) {
    out << format_number(p.lambda) << ',' << format_number(p.mean_rt) << ','
        << format_number(p.ci) << ',' << format_number(p.lt2) << ','
        << format_number(p.from2to4) << ',' << format_number(p.gt4);
    for (std::size_t i = 0; i < curve.servers.size(); ++i) {
      out << ',' << format_number(i < p.utilization.size() ? p.utilization[i] : 0.0);
    }
    for (std::size_t i = 0; i < curve.servers.size(); ++i) {
      out << ',' << format_number(i < p.throughput.size() ? p.throughput[i] : 0.0);
    }
    out << '\n';
  }
}

SweepCurve read_curve_csv(std::istream& in, const std::string& scenario) {
  SweepCurve curve;
  curve.scenario = scenario;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty curve CSV");
  const auto header = split(line);
  if (header.size() < 6 || header[0] != "lambda" || header[1] != "mean_rt") {
    throw std::runtime_error("not a curve CSV");
  }
  const std::size_t servers = (header.size() - 6) / 2;
  for (std::size_t i = 0; i < servers; ++i) curve.servers.push_back(header[6 + i].substr(5));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw std::runtime_error("ragged curve CSV row");
    SweepPoint p;
    p.lambda = parse_number(cells[0]);
    p.mean_rt = parse_number(cells[1]);
    p.ci = parse_number(cells[2]);
    p.lt2 = parse_number(cells[3]);
    p.from2to4 = parse_number(cells[4]);
    p.gt4 = parse_number(cells[5]);
    p.degenerate = std::isnan(p.mean_rt);
    for (std::size_t i = 0; i < servers; ++i) {
      p.utilization.push_back(parse_number(cells[6 + i]));
      p.throughput.push_back(parse_number(cells[6 + servers + i]));
    }
    curve.points.push_back(std::move(p));
  }
  return curve;
}

json sweep_summary(const SweepSpec& spec, const SweepCurve& curve,
                   const CriticalLambda& crit) {
  json points = json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"lambda", p.lambda},
                      {"mean_rt", num(p.mean_rt)},
                      {"ci", num(p.ci)},
                      {"degenerate_replications", p.degenerate_replications},
                      {"gt4", num(p.gt4)},
                      {"law_violations", p.law_violations},
                      {"pm", num_map(p.pm)}});
  }
  json crit_j = {{"status", std::string(to_string(crit.status))},
                 {"multiple_crossings", crit.multiple_crossings}};
  crit_j["lambda"] = crit.status == CriticalLambda::Status::kNotCrossed
                         ? json(nullptr)
                         : json(crit.lambda);
  json j = {{"scenario", spec.scenario.name},
            {"config_fingerprint", config_fingerprint(spec.scenario)},
            {"master_seed", spec.master_seed},
            {"replications", spec.replications},
            {"window", spec.window},
            {"threshold", spec.threshold},
            {"sweep", {{"from", spec.range.from}, {"to", spec.range.to}, {"step", spec.range.step}}},
            {"critical_lambda", crit_j},
            {"points", points}};
  if (spec.scenario.reference.lambda_crit) {
    j["reference_lambda_crit"] = *spec.scenario.reference.lambda_crit;
  }
  return j;
}

json to_json(const ScenarioComparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    json crit = {{"status", std::string(to_string(r.crit.status))}};
    crit["lambda"] = r.crit.status == CriticalLambda::Status::kNotCrossed
                         ? json(nullptr)
                         : json(r.crit.lambda);
    rows.push_back({{"scenario", r.scenario},
                    {"critical_lambda", crit},
                    {"service_demand", to_json(r.demand)},
                    {"total_demand", num(r.total_demand)},
                    {"analytic", to_json(r.analytic)}});
  }
  return {{"rows", rows}, {"ordering_consistent", c.ordering_consistent}};
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace shopsim

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

// shopsim: validate, run, sweep, oracle and compare subcommands.
//
// Exit codes: 0 success, 1 usage, 2 configuration error, 3 runtime error.

#include <fmt/core.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shopsim/config.hpp"
#include "shopsim/planner.hpp"
#include "shopsim/report_io.hpp"

namespace fs = std::filesystem;
using namespace shopsim;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Flags {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<double> lambda;
  bool json = false;
};

struct InvalidConfig {
  std::vector<std::string> messages;
};

fs::path output_dir(const Flags& f) {
  fs::path dir = "shopsim-out";
  if (!f.out.empty()) {
    dir = f.out;
  } else if (const char* env = std::getenv("SHOPSIM_OUT_DIR"); env && *env) {
    dir = env;
  }
  fs::create_directories(dir);
  return dir;
}

ScenarioConfig load_checked(const std::string& path, const Flags& f) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    throw InvalidConfig{{e.what()}};
  }
  if (f.seed) cfg.run.seed = *f.seed;
  if (f.replications) cfg.run.replications = *f.replications;
  if (f.lambda) cfg.lambda = *f.lambda;
  if (auto v = cfg.violations(); !v.empty()) throw InvalidConfig{std::move(v)};
  return cfg;
}

std::string render(const auto& writer_arg, auto writer) {
  std::ostringstream os;
  writer(os, writer_arg);
  return os.str();
}

int cmd_validate(const Flags& f) {
  int status = 0;
  for (const auto& path : f.configs) {
    try {
      const ScenarioConfig cfg = load_checked(path, f);
      // Compiling every class catches singular chains as well.
      (void)analyze(cfg);
      fmt::print("{}: ok (scenario {}, fingerprint {})\n", path, cfg.name,
                  config_fingerprint(cfg));
    } catch (const InvalidConfig& e) {
      for (const auto& m : e.messages) fmt::print(stderr, "{}: {}\n", path, m);
      status = kExitConfig;
    } catch (const ModelError& e) {
      fmt::print(stderr, "{}: {}\n", path, e.what());
      status = kExitConfig;
    }
  }
  return status;
}

int cmd_run(const Flags& f) {
  const ScenarioConfig cfg = load_checked(f.configs.front(), f);
  const fs::path dir = output_dir(f);
  const RunResult r = run_replication(cfg, cfg.lambda, cfg.run.seed, {true, true});
  write_text_file((dir / "summary.json").string(), run_summary(cfg, r).dump(2) + "\n");
  std::vector<std::string> servers;
  for (const auto& s : cfg.farm.servers) servers.push_back(s.name);
  std::ostringstream req;
  write_requests_csv(req, r.requests, servers);
  write_text_file((dir / "requests.csv").string(), req.str());
  std::ostringstream q;
  write_queue_csv(q, r.queue);
  write_text_file((dir / "queue_length.csv").string(), q.str());

  const MetricsReport& m = r.report;
  fmt::print("scenario {} lambda {} seed {}\n", cfg.name, r.lambda, r.seed);
  fmt::print("sessions started {} completed {} cut off {}\n", m.sessions.started,
             m.sessions.completed, m.sessions.cut_off);
  if (m.overall.count == 0) {
    fmt::print("no completed requests (degenerate run)\n");
  } else {
    fmt::print("requests {} mean rt {:.4f} s p95 {:.4f} s\n", m.overall.count,
               m.overall.mean, m.overall.p95);
    fmt::print("happiness <2s {:.4f} 2-4s {:.4f} >4s {:.4f}\n", m.buckets.lt2,
               m.buckets.from2to4, m.buckets.gt4);
  }
  for (const auto& s : m.servers) {
    fmt::print("  {:<4} util {:.4f} thr {:.3f}/s\n", s.name, s.utilization, s.throughput);
  }
  for (const auto& v : m.law_violations) fmt::print(stderr, "law violation: {}\n", v);
  fmt::print("wrote {}\n", dir.string());
  return m.law_violations.empty() ? 0 : kExitRuntime;
}

void print_curve_table(const SweepCurve& c) {
  fmt::print("{:>7} {:>10} {:>9} {:>7}\n", "lambda", "mean_rt", "ci", ">4s");
  for (const auto& p : c.points) {
    fmt::print("{:>7.2f} {:>10.4f} {:>9.4f} {:>7.4f}\n", p.lambda, p.mean_rt, p.ci, p.gt4);
  }
}

std::string crit_text(const CriticalLambda& c) {
  switch (c.status) {
    case CriticalLambda::Status::kCrossed:
      return fmt::format("{:.3f}{}", c.lambda, c.multiple_crossings ? " (multiple crossings)" : "");
    case CriticalLambda::Status::kBelowRange:
      return fmt::format("below sweep range (first point {:.3f} already exceeds)", c.lambda);
    case CriticalLambda::Status::kNotCrossed:
      break;
  }
  return "not reached";
}

int cmd_sweep(const Flags& f) {
  const ScenarioConfig cfg = load_checked(f.configs.front(), f);
  if (!cfg.sweep) throw InvalidConfig{{"sweep: section required for the sweep command"}};
  const SweepSpec spec = sweep_spec_from(cfg);
  const fs::path dir = output_dir(f);
  const SweepCurve curve = run_sweep(spec);
  const CriticalLambda crit = critical_lambda(curve, spec.threshold);
  write_text_file((dir / "curve.csv").string(), render(curve, write_curve_csv));
  write_text_file((dir / "sweep_summary.json").string(),
                  sweep_summary(spec, curve, crit).dump(2) + "\n");
  print_curve_table(curve);
  fmt::print("critical lambda ({} s threshold): {}\n", spec.threshold, crit_text(crit));
  if (cfg.reference.lambda_crit && crit.status == CriticalLambda::Status::kCrossed) {
    const double ref = *cfg.reference.lambda_crit;
    fmt::print("reference {:.3f}, delta {:+.3f} ({:+.1f}%)\n", ref, crit.lambda - ref,
               100.0 * (crit.lambda - ref) / ref);
  }
  fmt::print("wrote {}\n", dir.string());
  return 0;
}

void print_deltas(const ScenarioConfig& cfg, const AnalyticSessionMetrics& a) {
  if (cfg.reference.pm.empty()) return;
  std::map<std::string, double> ours = {
      {"PM3", a.pm3}, {"PM4", a.pm4}, {"PM5", a.pm5}, {"PM7", a.pm7}, {"PM8", a.pm8}};
  for (const auto& [k, v] : a.pm1) ours["PM1." + k] = v;
  for (const auto& [k, v] : a.pm2) ours["PM2." + k] = v;
  for (const auto& [k, v] : a.pm6) ours["PM6." + k] = v;
  fmt::print("\nreference comparison (diagnostic)\n");
  fmt::print("{:<22} {:>12} {:>12} {:>10}\n", "metric", "reference", "model", "delta");
  for (const auto& [k, ref] : cfg.reference.pm) {
    const auto it = ours.find(k);
    if (it == ours.end()) {
      fmt::print("{:<22} {:>12.5f} {:>12} {:>10}\n", k, ref, "-", "-");
    } else {
      fmt::print("{:<22} {:>12.5f} {:>12.5f} {:>+10.5f}\n", k, ref, it->second,
                 it->second - ref);
    }
  }
}

void print_analytic(const std::string& title, const AnalyticSessionMetrics& a) {
  fmt::print("{}\n", title);
  for (const auto& [k, v] : a.pm1) fmt::print("  PM1 {:<12} {:.5f}\n", k, v);
  for (const auto& [k, v] : a.pm2) fmt::print("  PM2 {:<12} {:.5f}\n", k, v);
  fmt::print("  PM4 {:.3f} s  PM5 {:.5f}  PM3 {:.5f}  PM7 {:.5f}  PM8 {:.5f}\n", a.pm4, a.pm5,
             a.pm3, a.pm7, a.pm8);
}

int cmd_oracle(const Flags& f) {
  const ScenarioConfig cfg = load_checked(f.configs.front(), f);
  const AnalyticReport a = analyze(cfg);
  if (f.json) {
    fmt::print("{}\n", to_json(a).dump(2));
    return 0;
  }
  fmt::print("scenario {}\n", cfg.name);
  for (const auto& [name, m] : a.per_class) print_analytic("class " + name, m);
  print_analytic("mix", a.mix);
  fmt::print("service demand per session\n");
  for (std::size_t i = 0; i < a.demand.servers.size(); ++i) {
    fmt::print("  {:<4} {:.5f} s\n", a.demand.servers[i], a.demand.demand[i]);
  }
  fmt::print("bottleneck {}  lambda_sat {:.3f} sessions/s\n", a.demand.bottleneck,
             a.demand.lambda_sat);
  print_deltas(cfg, a.mix);
  return 0;
}

int cmd_compare(const Flags& f) {
  if (f.configs.size() < 2) {
    fmt::print(stderr, "compare needs at least two --config files\n");
    return kExitUsage;
  }
  std::vector<SweepSpec> specs;
  for (const auto& path : f.configs) specs.push_back(sweep_spec_from(load_checked(path, f)));
  const fs::path dir = output_dir(f);
  std::vector<SweepCurve> curves;
  for (const auto& s : specs) {
    curves.push_back(run_sweep(s));
    const CriticalLambda crit = critical_lambda(curves.back(), s.threshold);
    const std::string stem = s.scenario.name.empty() ? "scenario" : s.scenario.name;
    write_text_file((dir / (stem + "_curve.csv")).string(), render(curves.back(), write_curve_csv));
    write_text_file((dir / (stem + "_sweep_summary.json")).string(),
                    sweep_summary(s, curves.back(), crit).dump(2) + "\n");
  }
  const ScenarioComparison cmp = compare_curves(specs, curves);
  write_text_file((dir / "comparison.json").string(), to_json(cmp).dump(2) + "\n");
  fmt::print("{:<10} {:>28} {:>10} {:>8} {:>11} {:>10}\n", "scenario", "lambda_crit", "reference",
             "D(bn)", "lambda_sat", "PM5");
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const auto& r = cmp.rows[i];
    const auto& ref = specs[i].scenario.reference.lambda_crit;
    fmt::print("{:<10} {:>28} {:>10} {:>8.4f} {:>11.3f} {:>10.4f}\n", r.scenario,
               crit_text(r.crit), ref ? fmt::format("{:.2f}", *ref) : "-", r.demand.max_demand,
               r.demand.lambda_sat, r.analytic.pm5);
  }
  fmt::print("ordering by bottleneck demand: {}\n",
             cmp.ordering_consistent ? "consistent" : "INCONSISTENT");
  fmt::print("wrote {}\n", dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for online-shop capacity planning"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub, bool many_configs) {
    auto* opt = sub->add_option("--config,-c", flags.configs, "Scenario JSON file")->required();
    if (!many_configs) opt->expected(1);
    sub->add_option("--seed", flags.seed, "Master seed override");
    sub->add_option("--replications", flags.replications, "Replications per point")
        ->check(CLI::PositiveNumber);
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out,-o", flags.out,
                    "Output directory (default $SHOPSIM_OUT_DIR or ./shopsim-out)");
  };

  auto* validate = app.add_subcommand("validate", "Check configuration files");
  add_common(validate, true);
  auto* run = app.add_subcommand("run", "Single run at the scenario's lambda");
  add_common(run, false);
  add_out(run);
  run->add_option("--lambda", flags.lambda, "Arrival rate override (sessions/s)")
      ->check(CLI::NonNegativeNumber);
  auto* sweep = app.add_subcommand("sweep", "Arrival-rate sweep and critical lambda");
  add_common(sweep, false);
  add_out(sweep);
  auto* oracle = app.add_subcommand("oracle", "Analytic session metrics and service demands");
  add_common(oracle, false);
  oracle->add_flag("--json", flags.json, "Print JSON");
  auto* compare = app.add_subcommand("compare", "Sweep several scenarios side by side");
  add_common(compare, true);
  add_out(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(flags);
    if (*run) return cmd_run(flags);
    if (*sweep) return cmd_sweep(flags);
    if (*oracle) return cmd_oracle(flags);
    if (*compare) return cmd_compare(flags);
  } catch (const InvalidConfig& e) {
    for (const auto& m : e.messages) fmt::print(stderr, "config error: {}\n", m);
    return kExitConfig;
  } catch (const SingularChainError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

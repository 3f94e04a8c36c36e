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

#include "shopsim/workload.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

namespace shopsim {

std::vector<std::string> ScenarioMix::violations() const {
  std::vector<std::string> out;
  if (classes.empty()) out.push_back("mix has no classes");
  if (classes.size() != pmf.size()) {
    out.push_back(fmt::format("mix has {} classes but {} probabilities",
                              classes.size(), pmf.size()));
    return out;
  }
  std::set<std::string> seen;
  double sum = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (!seen.insert(classes[i]).second) {
      out.push_back(fmt::format("class {} listed twice in mix", classes[i]));
    }
    if (!(pmf[i] >= 0.0) || pmf[i] > 1.0) {
      out.push_back(fmt::format("mix probability of {} is {}, outside [0,1]",
                                classes[i], pmf[i]));
    }
    sum += pmf[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    out.push_back(fmt::format("mix probabilities sum to {}", sum));
  }
  return out;
}

std::optional<ScenarioMix> preset_mix(std::string_view name) {
  const std::vector<std::string> classes{"rare", "ordinary", "frequent"};
  if (name == "S1") return ScenarioMix{classes, {0.10, 0.30, 0.60}};
  if (name == "S2") return ScenarioMix{classes, {0.33, 0.34, 0.33}};
  if (name == "S3") return ScenarioMix{classes, {0.50, 0.30, 0.20}};
  return std::nullopt;
}

double next_interarrival(const ArrivalProcess& a, RngStream& rng) {
  if (!(a.lambda > 0.0)) {
    throw std::invalid_argument("next_interarrival: lambda must be positive");
  }
  return sample_exponential(rng, 1.0 / a.lambda);
}

std::size_t draw_class_index(const ScenarioMix& mix, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mix.pmf.size(); ++i) {
    if (mix.pmf[i] <= 0.0) continue;
    acc += mix.pmf[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // u landed in the rounding gap below 1.
  return last_positive;
}

const std::string& draw_class(const ScenarioMix& mix, RngStream& rng) {
  return mix.classes[draw_class_index(mix, rng)];
}

std::map<std::string, double> per_class_rates(const ArrivalProcess& a) {
  std::map<std::string, double> rates;
  for (std::size_t i = 0; i < a.mix.classes.size(); ++i) {
    rates[a.mix.classes[i]] = a.lambda * a.mix.pmf[i];
  }
  return rates;
}

}  // namespace shopsim

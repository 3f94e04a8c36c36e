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

#ifndef SHOPSIM_WORKLOAD_HPP_
#define SHOPSIM_WORKLOAD_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shopsim/rng.hpp"

namespace shopsim {

// Class mix of a scenario: t_i is drawn with probability p_i.
struct ScenarioMix {
  std::vector<std::string> classes;
  std::vector<double> pmf;

  // Empty iff pmf is nonnegative, sums to 1 within 1e-9 and has one entry
  // per class.
  std::vector<std::string> violations() const;
};

// Presets "S1", "S2", "S3" over (rare, ordinary, frequent).
std::optional<ScenarioMix> preset_mix(std::string_view name);

struct ArrivalProcess {
  double lambda = 0.0;  // sessions per second
  ScenarioMix mix;
};

// Exp(1/lambda). Throws std::invalid_argument when lambda <= 0.
double next_interarrival(const ArrivalProcess& a, RngStream& rng);

// Index into mix.classes.
std::size_t draw_class_index(const ScenarioMix& mix, RngStream& rng);
const std::string& draw_class(const ScenarioMix& mix, RngStream& rng);

// lambda * p_i for every class, in mix order.
std::map<std::string, double> per_class_rates(const ArrivalProcess& a);

}  // namespace shopsim

#endif  // SHOPSIM_WORKLOAD_HPP_

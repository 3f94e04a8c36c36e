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

#ifndef SHOPSIM_RNG_HPP_
#define SHOPSIM_RNG_HPP_

#include <cstdint>
#include <random>

namespace shopsim {

// Fixed substream ids. Service-time streams are kServiceBase + server index,
// so adding a server never shifts the arrival or behaviour streams.
enum class StreamId : std::uint32_t {
  kArrivals = 0,
  kClassDraw = 1,
  kTransitions = 2,
  kThinkTimes = 3,
  kWan = 4,
  kServiceBase = 16,
};

constexpr std::uint32_t service_stream(std::size_t server_index) {
  return static_cast<std::uint32_t>(StreamId::kServiceBase) +
         static_cast<std::uint32_t>(server_index);
}

// Mixes a master seed with an index; used to derive replication seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// One independent pseudo-random substream. The engine (mt19937_64) and the
// variate transforms below are fully specified, so a (seed, stream) pair
// yields the same sequence on every platform and standard library.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t stream_id);
  RngStream(std::uint64_t seed, StreamId id)
      : RngStream(seed, static_cast<std::uint32_t>(id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream_id() const { return stream_id_; }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  double standard_normal();

 private:
  std::uint64_t seed_;
  std::uint32_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Exp(mean). Throws std::invalid_argument when mean <= 0. Never returns 0.
double sample_exponential(RngStream& s, double mean);

// N(mean, sigma) re-sampled until the value exceeds `floor`.
// Requires mean > floor >= 0 and sigma > 0.
double sample_truncated_normal(RngStream& s, double mean, double sigma,
                               double floor = 0.0);

}  // namespace shopsim

#endif  // SHOPSIM_RNG_HPP_

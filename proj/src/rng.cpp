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

#include "shopsim/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shopsim {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t stream_id) {
  // seed_seq's mixing algorithm is fixed by the standard.
  const std::uint64_t mixed = splitmix64(seed ^ splitmix64(stream_id));
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream_id,
                    static_cast<std::uint32_t>(mixed),
                    static_cast<std::uint32_t>(mixed >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x5851F42D4C957F2DULL));
}

RngStream::RngStream(std::uint64_t seed, std::uint32_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

// Marsaglia polar method; std::normal_distribution is not portable.
double RngStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

double sample_exponential(RngStream& s, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("sample_exponential: mean must be positive, got " +
                                std::to_string(mean));
  }
  double x;
  do {
    x = -mean * std::log(s.uniform_open_low());
  } while (x <= 0.0);
  return x;
}

double sample_truncated_normal(RngStream& s, double mean, double sigma,
                               double floor) {
  if (!(sigma > 0.0) || !(floor >= 0.0) || !(mean > floor) ||
      !std::isfinite(mean) || !std::isfinite(sigma)) {
    throw std::invalid_argument(
        "sample_truncated_normal: need mean > floor >= 0 and sigma > 0");
  }
  double x;
  do {
    x = mean + sigma * s.standard_normal();
  } while (x <= floor);
  return x;
}

}  // namespace shopsim

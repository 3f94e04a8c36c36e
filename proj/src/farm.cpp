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

#include "shopsim/farm.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <set>
#include <stdexcept>

namespace shopsim {

std::vector<ServerSpec> default_servers() {
  auto spec = [](const char* name, double mean) {
    return ServerSpec{name, mean, mean / 30.0, 0.0};
  };
  return {spec("FES", 0.001), spec("WS", 0.010), spec("DbS", 0.005),
          spec("ApS", 0.010), spec("AuS", 0.010)};
}

RouteTable default_routes() {
  RouteTable rt;
  rt.routes = {
      {"Browse", {"WS", "DbS", "WS"}},
      {"Search", {"WS", "ApS", "DbS", "ApS", "WS"}},
      {"Checkout", {"WS", "AuS", "DbS", "AuS", "WS"}},
      {"Add", {"WS", "DbS", "WS"}},
  };
  return rt;
}

std::vector<std::string> route_for(const RouteTable& rt, std::string_view type) {
  const auto it = rt.routes.find(std::string(type));
  if (it == rt.routes.end()) {
    throw std::out_of_range(fmt::format("no route for request type '{}'", type));
  }
  std::vector<std::string> path;
  path.reserve(it->second.size() + 1);
  if (rt.fes_enabled) path.push_back(rt.front_end);
  path.insert(path.end(), it->second.begin(), it->second.end());
  return path;
}

std::optional<std::size_t> FarmSpec::server_index(std::string_view name) const {
  for (std::size_t i = 0; i < servers.size(); ++i) {
    if (servers[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> FarmSpec::violations() const {
  std::vector<std::string> v;
  std::set<std::string> names;
  for (const auto& s : servers) {
    if (!names.insert(s.name).second) {
      v.push_back(fmt::format("duplicate server {}", s.name));
    }
    if (!(s.mean_service > 0.0) || !(s.sigma > 0.0)) {
      v.push_back(fmt::format("server {} needs positive mean and sigma", s.name));
    }
    if (!(s.floor >= 0.0) || !(s.floor < s.mean_service)) {
      v.push_back(fmt::format("server {} floor must lie in [0, mean)", s.name));
    }
  }
  if (routes.fes_enabled && !names.count(routes.front_end)) {
    v.push_back(fmt::format("front-end server {} does not exist", routes.front_end));
  }
  for (const auto& [type, seq] : routes.routes) {
    if (seq.empty()) v.push_back(fmt::format("route for {} is empty", type));
    for (const auto& s : seq) {
      if (!names.count(s)) {
        v.push_back(fmt::format("route for {} names unknown server {}", type, s));
      }
    }
  }
  if (wan.enabled) {
    if (!(wan.mean > 0.0) || !(wan.sigma > 0.0)) {
      v.push_back("wan needs positive mean and sigma");
    }
    if (!(wan.floor >= 0.0) || !(wan.floor < wan.mean)) {
      v.push_back("wan floor must lie in [0, mean)");
    }
  }
  return v;
}

double ServiceDemand::of(std::string_view server) const {
  for (std::size_t i = 0; i < servers.size(); ++i) {
    if (servers[i] == server) return demand[i];
  }
  throw std::out_of_range(fmt::format("unknown server {}", server));
}

ServiceDemand service_demand(
    const FarmSpec& farm, const std::map<std::string, double>& requests_per_session) {
  ServiceDemand d;
  for (const auto& s : farm.servers) d.servers.push_back(s.name);
  d.demand.assign(farm.servers.size(), 0.0);
  for (const auto& [type, count] : requests_per_session) {
    if (count == 0.0) continue;
    for (const auto& hop : route_for(farm.routes, type)) {
      const std::size_t i = farm.server_index(hop).value();
      d.demand[i] += count * farm.servers[i].mean_service;
    }
  }
  for (std::size_t i = 0; i < d.demand.size(); ++i) {
    if (d.demand[i] > d.max_demand) {
      d.max_demand = d.demand[i];
      d.bottleneck = d.servers[i];
    }
  }
  d.lambda_sat = d.max_demand > 0.0 ? 1.0 / d.max_demand
                                    : std::numeric_limits<double>::infinity();
  return d;
}

ServerFarm::ServerFarm(Simulator& sim, const FarmSpec& spec, std::uint64_t seed,
                       RequestObserver* observer, FarmOptions opts)
    : sim_(sim),
      spec_(spec),
      observer_(observer),
      opts_(opts),
      wan_rng_(seed, StreamId::kWan) {
  if (const auto v = spec_.violations(); !v.empty()) {
    throw std::invalid_argument("invalid farm: " + v.front());
  }
  for (std::size_t i = 0; i < spec_.servers.size(); ++i) {
    servers_.push_back(
        std::make_unique<FifoResource>(sim_, spec_.servers[i].name, this));
    service_rng_.emplace_back(seed, service_stream(i));
  }
  for (const auto& [type, seq] : spec_.routes.routes) {
    types_.push_back(type);
    std::vector<std::uint32_t> path;
    for (const auto& hop : route_for(spec_.routes, type)) {
      path.push_back(static_cast<std::uint32_t>(*spec_.server_index(hop)));
    }
    paths_.push_back(std::move(path));
  }
}

std::uint32_t ServerFarm::type_index(std::string_view type) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i] == type) return static_cast<std::uint32_t>(i);
  }
  throw std::out_of_range(fmt::format("no route for request type '{}'", type));
}

double ServerFarm::draw_service(std::uint32_t server) {
  const auto& s = spec_.servers[server];
  if (opts_.sample_at_means) return s.mean_service;
  return sample_truncated_normal(service_rng_[server], s.mean_service, s.sigma,
                                 s.floor);
}

double ServerFarm::draw_wan() {
  if (!spec_.wan.enabled) return 0.0;
  if (opts_.sample_at_means) return spec_.wan.mean;
  return sample_truncated_normal(wan_rng_, spec_.wan.mean, spec_.wan.sigma,
                                 spec_.wan.floor);
}

std::uint64_t ServerFarm::serve_request(std::uint32_t type, std::uint64_t session,
                                        std::uint32_t tag) {
  if (type >= types_.size()) throw std::out_of_range("request type index");
  std::uint32_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  Request& r = slots_[slot];
  r.id = next_id_++;
  r.type = type;
  r.session = session;
  r.tag = tag;
  r.issued_at = sim_.now();
  r.completed_at = 0.0;
  r.wait = r.service = r.wan_in = 0.0;
  r.next_hop = 0;
  r.hops.clear();
  r.wan_out = draw_wan();
  ++in_flight_;
  if (spec_.wan.enabled) {
    sim_.schedule_in(r.wan_out, this, (std::uint64_t{slot} << 1) | kWanOutDone);
  } else {
    enter_hop(slot);
  }
  return r.id;
}

void ServerFarm::enter_hop(std::uint32_t slot) {
  Request& r = slots_[slot];
  const std::uint32_t server = paths_[r.type][r.next_hop];
  servers_[server]->enqueue(slot, draw_service(server));
}

void ServerFarm::job_done(FifoResource& resource, const JobRecord& job) {
  const auto slot = static_cast<std::uint32_t>(job.id);
  Request& r = slots_[slot];
  r.wait += job.wait();
  r.service += job.service_time;
  if (opts_.record_hops) {
    const auto server = paths_[r.type][r.next_hop];
    r.hops.push_back({server, job.queued_at, job.started_at, job.completed_at});
  }
  (void)resource;
  if (++r.next_hop < paths_[r.type].size()) {
    enter_hop(slot);
  } else {
    leave_farm(slot);
  }
}

void ServerFarm::leave_farm(std::uint32_t slot) {
  Request& r = slots_[slot];
  r.wan_in = draw_wan();
  if (spec_.wan.enabled) {
    sim_.schedule_in(r.wan_in, this, (std::uint64_t{slot} << 1) | kWanInDone);
  } else {
    finish(slot);
  }
}

void ServerFarm::finish(std::uint32_t slot) {
  Request& r = slots_[slot];
  r.completed_at = sim_.now();
  --in_flight_;
  if (observer_ != nullptr) observer_->request_done(r);
  free_.push_back(slot);
}

void ServerFarm::on_event(std::uint64_t payload) {
  const auto slot = static_cast<std::uint32_t>(payload >> 1);
  if ((payload & 1) == kWanOutDone) {
    enter_hop(slot);
  } else {
    finish(slot);
  }
}

}  // namespace shopsim

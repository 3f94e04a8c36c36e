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

// Server side: FIFO servers with truncated-normal service times, per-type
// routing, WAN delays, and the service-demand arithmetic behind the
// bottleneck analysis.

#ifndef SHOPSIM_FARM_HPP_
#define SHOPSIM_FARM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shopsim/kernel.hpp"
#include "shopsim/rng.hpp"

namespace shopsim {

struct ServerSpec {
  std::string name;
  double mean_service = 0.0;  // seconds
  double sigma = 0.0;         // seconds
  double floor = 0.0;         // samples at or below are redrawn
};

// FES, WS, DbS, ApS, AuS with sigma = mean / 30 (so +-3 sigma = +-10%).
std::vector<ServerSpec> default_servers();

struct WanSpec {
  bool enabled = true;
  double mean = 0.5;
  double sigma = 0.133333;
  double floor = 0.0;
};

struct RouteTable {
  // Back-end sequence per request type.
  std::map<std::string, std::vector<std::string>> routes;
  std::string front_end = "FES";
  bool fes_enabled = true;  // front end admits every request once
};

// Browse, Search, Checkout, and Add (routed like Browse).
RouteTable default_routes();

// Full path of a request: the front end (if enabled) then the back-end
// sequence. Throws std::out_of_range for unknown types.
std::vector<std::string> route_for(const RouteTable& rt, std::string_view type);

struct FarmSpec {
  std::vector<ServerSpec> servers = default_servers();
  RouteTable routes = default_routes();
  WanSpec wan;

  std::vector<std::string> violations() const;
  std::optional<std::size_t> server_index(std::string_view name) const;
};

struct ServiceDemand {
  std::vector<std::string> servers;  // farm order
  std::vector<double> demand;        // seconds per session
  std::string bottleneck;
  double max_demand = 0.0;
  double lambda_sat = 0.0;           // 1 / max_demand; +inf when idle

  double of(std::string_view server) const;
};

// D(server) = sum over types of requests/session x visits in route x mean.
ServiceDemand service_demand(const FarmSpec& farm,
                             const std::map<std::string, double>& requests_per_session);

struct HopRecord {
  std::uint32_t server = 0;
  SimTime queued_at = 0.0;
  SimTime started_at = 0.0;
  SimTime completed_at = 0.0;
};

struct Request {
  std::uint64_t id = 0;
  std::uint32_t type = 0;  // index into ServerFarm::request_types()
  std::uint64_t session = 0;
  std::uint32_t tag = 0;  // caller-defined, e.g. the emitting state
  SimTime issued_at = 0.0;
  SimTime completed_at = 0.0;
  double wan_out = 0.0;
  double wan_in = 0.0;
  double wait = 0.0;     // summed queueing delay over hops
  double service = 0.0;  // summed service time over hops
  std::uint32_t next_hop = 0;
  std::vector<HopRecord> hops;  // filled only when hop recording is on

  double response_time() const { return completed_at - issued_at; }
};

class RequestObserver {
 public:
  virtual ~RequestObserver() = default;
  virtual void request_done(const Request& r) = 0;
};

struct FarmOptions {
  bool record_hops = false;
  // Every service and WAN time equals its mean; for exact-value tests.
  bool sample_at_means = false;
};

// Runtime farm bound to one Simulator.
class ServerFarm final : public EventSink, public JobListener {
 public:
  ServerFarm(Simulator& sim, const FarmSpec& spec, std::uint64_t seed,
             RequestObserver* observer, FarmOptions opts = {});
  ServerFarm(const ServerFarm&) = delete;
  ServerFarm& operator=(const ServerFarm&) = delete;

  const std::vector<std::string>& request_types() const { return types_; }
  // Throws std::out_of_range for unknown types.
  std::uint32_t type_index(std::string_view type) const;

  // Issues a request now; returns its id.
  std::uint64_t serve_request(std::uint32_t type, std::uint64_t session,
                              std::uint32_t tag = 0);
  std::uint64_t serve_request(std::string_view type, std::uint64_t session,
                              std::uint32_t tag = 0) {
    return serve_request(type_index(type), session, tag);
  }

  std::size_t server_count() const { return servers_.size(); }
  FifoResource& server(std::size_t i) { return *servers_[i]; }
  const FifoResource& server(std::size_t i) const { return *servers_[i]; }
  const FarmSpec& spec() const { return spec_; }
  std::size_t in_flight() const { return in_flight_; }

  void on_event(std::uint64_t payload) override;
  void job_done(FifoResource& resource, const JobRecord& job) override;

 private:
  enum Kind : std::uint64_t { kWanOutDone = 0, kWanInDone = 1 };

  void enter_hop(std::uint32_t slot);
  void leave_farm(std::uint32_t slot);
  void finish(std::uint32_t slot);
  double draw_service(std::uint32_t server);
  double draw_wan();

  Simulator& sim_;
  FarmSpec spec_;
  RequestObserver* observer_;
  FarmOptions opts_;

  std::vector<std::string> types_;
  std::vector<std::vector<std::uint32_t>> paths_;  // per type
  std::vector<std::unique_ptr<FifoResource>> servers_;
  std::vector<RngStream> service_rng_;
  RngStream wan_rng_;

  std::vector<Request> slots_;
  std::vector<std::uint32_t> free_;
  std::uint64_t next_id_ = 0;
  std::size_t in_flight_ = 0;
};

}  // namespace shopsim

#endif  // SHOPSIM_FARM_HPP_

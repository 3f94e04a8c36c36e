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

#ifndef SHOPSIM_KERNEL_HPP_
#define SHOPSIM_KERNEL_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shopsim {

// Seconds of simulated time.
using SimTime = double;

// Receives dispatched events. The payload is an opaque continuation id that
// the sink decodes itself.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_event(std::uint64_t payload) = 0;
};

struct Event {
  SimTime fire_at = 0.0;
  std::uint64_t sequence_no = 0;
  EventSink* sink = nullptr;
  std::uint64_t payload = 0;
};

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Single-threaded event calendar. Events with equal fire_at are dispatched in
// creation order.
class Simulator {
 public:
  Simulator() = default;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const { return now_; }

  // Throws SchedulingError if `at` lies before now().
  void schedule(SimTime at, EventSink* sink, std::uint64_t payload);
  void schedule_in(SimTime delay, EventSink* sink, std::uint64_t payload) {
    schedule(now_ + delay, sink, payload);
  }

  // Dispatches every event with fire_at <= until. The clock ends at `until`
  // when events remain beyond it, else at the last dispatched event.
  void run(SimTime until);

  std::size_t pending() const { return heap_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }

  // Called before each dispatch; used for trace comparison in tests.
  void set_trace(std::function<void(const Event&)> trace) {
    trace_ = std::move(trace);
  }

 private:
  static bool later(const Event& a, const Event& b) {
    if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
    return a.sequence_no > b.sequence_no;
  }

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::vector<Event> heap_;
  std::function<void(const Event&)> trace_;
};

// A job as seen by the listener when it leaves the resource.
struct JobRecord {
  std::uint64_t id = 0;
  SimTime queued_at = 0.0;
  SimTime started_at = 0.0;
  SimTime completed_at = 0.0;
  double service_time = 0.0;

  double wait() const { return started_at - queued_at; }
};

class FifoResource;

class JobListener {
 public:
  virtual ~JobListener() = default;
  virtual void job_done(FifoResource& resource, const JobRecord& job) = 0;
};

// Single first-come-first-served server with an unbounded queue.
class FifoResource final : public EventSink {
 public:
  FifoResource(Simulator& sim, std::string name, JobListener* listener);
  FifoResource(const FifoResource&) = delete;
  FifoResource& operator=(const FifoResource&) = delete;

  const std::string& name() const { return name_; }

  // Starts service now if idle, else appends to the queue. Returns the
  // completion time, which is fixed at enqueue under FIFO.
  SimTime enqueue(std::uint64_t job_id, double service_time);

  bool busy() const { return busy_; }
  std::size_t queue_length() const { return queue_.size(); }
  std::size_t in_system() const { return queue_.size() + (busy_ ? 1 : 0); }

  // Counters since the last reset_stats().
  std::uint64_t arrivals() const { return arrivals_; }
  std::uint64_t completions() const { return completions_; }

  // Busy seconds and queue-length area over [stats start, t]; t >= now().
  double busy_time(SimTime t) const;
  double queue_area(SimTime t) const;
  SimTime stats_start() const { return stats_start_; }
  std::size_t max_queue_length() const { return max_queue_; }

  // Starts a fresh measurement interval at now(); used for warm-up discard.
  void reset_stats();

  void on_event(std::uint64_t payload) override;

 private:
  struct Waiting {
    std::uint64_t id;
    SimTime queued_at;
    double service_time;
  };

  void start(const Waiting& w);
  void touch_queue();

  Simulator& sim_;
  std::string name_;
  JobListener* listener_;

  std::deque<Waiting> queue_;
  bool busy_ = false;
  JobRecord current_;
  SimTime tail_completion_ = 0.0;

  SimTime stats_start_ = 0.0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t completions_ = 0;
  double busy_accum_ = 0.0;     // closed busy periods within the interval
  SimTime busy_since_ = 0.0;    // start of the open busy period
  double queue_area_ = 0.0;
  SimTime queue_touched_ = 0.0;
  std::size_t max_queue_ = 0;
};

}  // namespace shopsim

#endif  // SHOPSIM_KERNEL_HPP_

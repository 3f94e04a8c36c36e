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

#include "shopsim/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace shopsim {

void Simulator::schedule(SimTime at, EventSink* sink, std::uint64_t payload) {
  if (!(at >= now_) || !std::isfinite(at)) {
    throw SchedulingError("event scheduled in the past: t=" +
                          std::to_string(at) + " < now=" + std::to_string(now_));
  }
  heap_.push_back(Event{at, next_seq_++, sink, payload});
  std::push_heap(heap_.begin(), heap_.end(), later);
}

void Simulator::run(SimTime until) {
  while (!heap_.empty() && heap_.front().fire_at <= until) {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    const Event ev = heap_.back();
    heap_.pop_back();
    now_ = ev.fire_at;
    ++dispatched_;
    if (trace_) trace_(ev);
    ev.sink->on_event(ev.payload);
  }
  if (!heap_.empty()) now_ = std::max(now_, until);
}

FifoResource::FifoResource(Simulator& sim, std::string name,
                           JobListener* listener)
    : sim_(sim), name_(std::move(name)), listener_(listener) {}

SimTime FifoResource::enqueue(std::uint64_t job_id, double service_time) {
  if (!(service_time > 0.0) || !std::isfinite(service_time)) {
    throw std::invalid_argument("FifoResource " + name_ +
                                ": service time must be positive");
  }
  const SimTime now = sim_.now();
  ++arrivals_;
  const SimTime done = std::max(now, tail_completion_) + service_time;
  tail_completion_ = done;
  const Waiting w{job_id, now, service_time};
  if (!busy_) {
    start(w);
  } else {
    touch_queue();
    queue_.push_back(w);
    max_queue_ = std::max(max_queue_, queue_.size());
  }
  return done;
}

void FifoResource::start(const Waiting& w) {
  const SimTime now = sim_.now();
  busy_ = true;
  busy_since_ = now;
  current_ = JobRecord{w.id, w.queued_at, now, now + w.service_time,
                       w.service_time};
  sim_.schedule(current_.completed_at, this, 0);
}

void FifoResource::touch_queue() {
  const SimTime now = sim_.now();
  queue_area_ += static_cast<double>(queue_.size()) * (now - queue_touched_);
  queue_touched_ = now;
}

void FifoResource::on_event(std::uint64_t) {
  const JobRecord done = current_;
  ++completions_;
  busy_accum_ += sim_.now() - busy_since_;
  busy_ = false;
  if (!queue_.empty()) {
    touch_queue();
    const Waiting next = queue_.front();
    queue_.pop_front();
    start(next);
  }
  if (listener_ != nullptr) listener_->job_done(*this, done);
}

double FifoResource::busy_time(SimTime t) const {
  double b = busy_accum_;
  if (busy_) b += std::max(0.0, t - busy_since_);
  return b;
}

double FifoResource::queue_area(SimTime t) const {
  return queue_area_ + static_cast<double>(queue_.size()) *
                           std::max(0.0, t - queue_touched_);
}

void FifoResource::reset_stats() {
  const SimTime now = sim_.now();
  stats_start_ = now;
  arrivals_ = 0;
  completions_ = 0;
  busy_accum_ = 0.0;
  if (busy_) busy_since_ = now;
  queue_area_ = 0.0;
  queue_touched_ = now;
  max_queue_ = queue_.size();
}

}  // namespace shopsim

#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "redq/error.hpp"

namespace redq {

struct EventHandle {
  std::uint64_t seq = 0;
};

template <class Payload>
struct EventRecord {
  double time;
  std::uint64_t seq;
  Payload payload;
};

/// Future-event set ordered by (time, seq). Cancellation is lazy: cancelled
/// sequence numbers are remembered and skipped when they reach the top.
template <class Payload>
class EventQueue {
 public:
  double now() const { return now_; }
  std::uint64_t dispatched() const { return dispatched_; }
  std::size_t pending() const { return heap_.size() - cancelled_.size(); }

  EventHandle schedule(double time, Payload payload) {
    if (time < now_) {
      throw SchedulingInPast("event at t=" + std::to_string(time) + " precedes now=" +
                             std::to_string(now_));
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(EventRecord<Payload>{time, seq, std::move(payload)});
    return EventHandle{seq};
  }

  void cancel(EventHandle handle) { cancelled_.insert(handle.seq); }

  /// Pops the earliest live event and advances the clock; nullopt once empty.
  std::optional<EventRecord<Payload>> next_event() {
    while (!heap_.empty()) {
      EventRecord<Payload> top = heap_.top();
      heap_.pop();
      if (auto it = cancelled_.find(top.seq); it != cancelled_.end()) {
        cancelled_.erase(it);
        continue;
      }
      now_ = top.time;
      ++dispatched_;
      return top;
    }
    return std::nullopt;
  }

 private:
  struct Later {
    bool operator()(const EventRecord<Payload>& x, const EventRecord<Payload>& y) const {
      if (x.time != y.time) return x.time > y.time;
      return x.seq > y.seq;
    }
  };

  std::priority_queue<EventRecord<Payload>, std::vector<EventRecord<Payload>>, Later> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  double now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
};

}  // namespace redq

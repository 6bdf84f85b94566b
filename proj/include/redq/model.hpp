#pragma once

// Types shared by the centralized and distributed queue models.

#include <bit>
#include <cstdint>
#include <functional>
#include <string_view>
#include <variant>
#include <vector>

namespace redq {

using ServerId = std::uint32_t;
using BatchId = std::uint64_t;

inline constexpr unsigned kMaxServers = 64;

/// Set of server ids in [0, 64).
class ServerSet {
 public:
  constexpr ServerSet() = default;
  constexpr explicit ServerSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr ServerSet all(unsigned n) {
    return ServerSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }
  static constexpr ServerSet of(std::initializer_list<ServerId> ids) {
    ServerSet s;
    for (ServerId id : ids) s.insert(id);
    return s;
  }

  constexpr bool contains(ServerId s) const { return (bits_ >> s) & 1U; }
  constexpr void insert(ServerId s) { bits_ |= std::uint64_t{1} << s; }
  constexpr void erase(ServerId s) { bits_ &= ~(std::uint64_t{1} << s); }
  constexpr unsigned size() const { return static_cast<unsigned>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool subset_of(ServerSet other) const { return (bits_ & ~other.bits_) == 0; }

  /// Members in ascending order.
  std::vector<ServerId> members() const {
    std::vector<ServerId> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(static_cast<ServerId>(std::countr_zero(b)));
    return out;
  }

  constexpr bool operator==(const ServerSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

enum class ServerMode { kIdle, kBusy, kCooldown };

std::string_view to_string(ServerMode mode);

struct ServerView {
  ServerMode mode = ServerMode::kIdle;
  BatchId batch = 0;    // valid when busy
  double since = 0;     // service start when busy
  double until = 0;     // cooldown end when cooling down
};

// Effects emitted by a model while handling one event, in the order they
// happened. The simulation driver turns them into scheduled events.
struct JobStarted {
  ServerId server;
  BatchId batch;
};
/// An in-service sibling was cancelled because its batch departed.
struct JobRemoved {
  ServerId server;
  BatchId batch;
};
/// A queued (never started) sibling was deleted; `server` is the owning
/// buffer in the distributed model and kNoServer for the central buffer.
struct QueuedJobDropped {
  ServerId server;
  BatchId batch;
};
struct CooldownStarted {
  ServerId server;
  double until;
};
struct ServerIdled {
  ServerId server;
};
struct BatchDeparted {
  BatchId batch;
  double arrival_time;
  double departure_time;
  ServerSet servers_touched;
  unsigned jobs_started;
};

inline constexpr ServerId kNoServer = 0xffffffffU;

using Effect =
    std::variant<JobStarted, JobRemoved, QueuedJobDropped, CooldownStarted, ServerIdled, BatchDeparted>;

/// Draws the idle period of a server whose in-service job was removed.
/// A null function means zero removal cost.
using RemovalCost = std::function<double(ServerId)>;

enum class BufferMode { kCentral, kDistributed };

std::string_view to_string(BufferMode mode);

}  // namespace redq

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "redq/rng.hpp"

namespace redq {

/// One step of an abstract replay: a batch arrival, or the timer of server
/// slot `index` firing. Timers keep running at idle servers; a fire there is
/// a no-op.
struct ReplayEvent {
  enum class Kind : std::uint8_t { kArrival, kTimerFire };
  Kind kind = Kind::kArrival;
  unsigned index = 0;

  static constexpr ReplayEvent arrival() { return {Kind::kArrival, 0}; }
  static constexpr ReplayEvent timer(unsigned i) { return {Kind::kTimerFire, i}; }
  bool is_arrival() const { return kind == Kind::kArrival; }
  bool operator==(const ReplayEvent&) const = default;
};

/// Batch counts of the two coupled systems after every event.
struct ReplayTrace {
  std::vector<ReplayEvent> events;
  std::vector<std::uint64_t> b1;
  std::vector<std::uint64_t> b2;
  bool operator==(const ReplayTrace&) const = default;
};

/// Whether b1(z) >= b2(z) at every z.
struct DominanceVerdict {
  bool holds = true;
  std::optional<std::size_t> first_violation;
  /// Some z has b1(z) > b2(z).
  bool strict = false;
};

struct ReplayOutcome {
  ReplayTrace trace;
  DominanceVerdict verdict;
};

DominanceVerdict compare_counts(std::span<const std::uint64_t> b1, std::span<const std::uint64_t> b2);

/// k = 1, both systems re-indexed busy-first after every event. System 1 uses
/// r1, system 2 uses r2. With b batches present a system has min(r*b, n) busy
/// servers, so TimerFire(i) completes a batch iff i < min(r*b, n).
/// Throws InvalidRequestDegree unless 1 <= r1 < r2 <= n.
ReplayOutcome replay_k1(unsigned n, unsigned r1, unsigned r2, std::span<const ReplayEvent> events);

/// Same replay, driven through two CentralizedQueue instances whose servers
/// are re-ordered busy-first (ascending id within each group) before each
/// timer is resolved. Used to cross-check replay_k1.
ReplayOutcome replay_k1_permuted(unsigned n, unsigned r1, unsigned r2, std::span<const ReplayEvent> events);

/// How TimerFire(i) picks a server in the general-k replay.
enum class ServerLabeling {
  /// Timer i always belongs to server i.
  kFixed,
  /// Before each timer, busy servers take the lowest labels ordered by the
  /// arrival of the batch they serve (then by id); idle servers follow in id
  /// order. With memoryless service this relabeling leaves each system's law
  /// unchanged.
  kOldestBatchFirst,
};

std::string_view to_string(ServerLabeling labeling);
/// "fixed" or "oldest-first".
ServerLabeling parse_server_labeling(std::string_view text);

/// k-of-r semantics with zero removal cost. System 1 (A) uses r_alt, system
/// 2 (B) uses r = n. TimerFire(i) completes the job at the server labelled i
/// in each system where that server is busy.
/// Throws InvalidRequestDegree unless 1 <= k <= r_alt <= n.
ReplayOutcome replay_general_k(unsigned n, unsigned k, unsigned r_alt, std::span<const ReplayEvent> events,
                               ServerLabeling labeling = ServerLabeling::kOldestBatchFirst);

/// Each event is an arrival with probability 1/(n+1), else TimerFire(i) with
/// i uniform on [0, n).
std::vector<ReplayEvent> random_event_sequence(unsigned n, std::size_t length, Rng& rng);

/// One event per line: `A` or `T<i>`. Blank lines and `#` comments are
/// skipped. Throws ParseError with the line number.
std::vector<ReplayEvent> parse_event_sequence(std::istream& in, unsigned n);
std::vector<ReplayEvent> load_event_sequence(const std::filesystem::path& path, unsigned n);
void write_event_sequence(std::ostream& out, std::span<const ReplayEvent> events);

std::string to_string(const ReplayEvent& e);

struct SweepViolation {
  std::uint64_t sequence;
  std::size_t event;
};

struct SweepReport {
  std::uint64_t sequences = 0;
  std::uint64_t events = 0;
  std::uint64_t violations = 0;
  /// Sequences with b1(z) > b2(z) somewhere.
  std::uint64_t strict_sequences = 0;
  std::optional<SweepViolation> first_violation;
};

/// Runs `sequences` random sequences of `length` events; sequence i draws
/// from the replay stream (seed, i).
SweepReport sweep_k1(unsigned n, unsigned r1, unsigned r2, std::uint64_t sequences, std::size_t length,
                     std::uint64_t seed);
SweepReport sweep_general_k(unsigned n, unsigned k, unsigned r_alt, std::uint64_t sequences, std::size_t length,
                            std::uint64_t seed, ServerLabeling labeling = ServerLabeling::kOldestBatchFirst);

}  // namespace redq

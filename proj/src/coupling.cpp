#include "redq/coupling.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <tuple>

#include "redq/centralized_queue.hpp"
#include "redq/detail/text.hpp"
#include "redq/error.hpp"
#include "redq/model.hpp"

namespace redq {

namespace {

void check_k1(unsigned n, unsigned r1, unsigned r2) {
  if (n == 0 || n > kMaxServers) throw InvalidRequestDegree("n must be in [1, 64]");
  if (!(1 <= r1 && r1 < r2 && r2 <= n)) {
    throw InvalidRequestDegree("replay needs 1 <= r1 < r2 <= n, got r1=" + std::to_string(r1) +
                               " r2=" + std::to_string(r2) + " n=" + std::to_string(n));
  }
}

void check_general(unsigned n, unsigned k, unsigned r_alt) {
  if (n == 0 || n > kMaxServers) throw InvalidRequestDegree("n must be in [1, 64]");
  if (!(1 <= k && k <= r_alt && r_alt <= n)) {
    throw InvalidRequestDegree("replay needs 1 <= k <= r_alt <= n, got k=" + std::to_string(k) +
                               " r_alt=" + std::to_string(r_alt) + " n=" + std::to_string(n));
  }
}

void check_events(unsigned n, std::span<const ReplayEvent> events) {
  for (const ReplayEvent& e : events) {
    if (!e.is_arrival() && e.index >= n) {
      throw ValidationError("timer index " + std::to_string(e.index) + " out of range for n=" + std::to_string(n));
    }
  }
}

ReplayEvent draw_event(unsigned n, Rng& rng) {
  const auto x = static_cast<unsigned>(rng.below(n + 1));
  return x == n ? ReplayEvent::arrival() : ReplayEvent::timer(x);
}

// Busy-first occupancy state of one k = 1 system.
struct OccupancySystem {
  std::uint64_t n;
  std::uint64_t r;
  std::uint64_t b = 0;

  void apply(const ReplayEvent& e) {
    if (e.is_arrival()) {
      ++b;
    } else if (e.index < std::min(r * b, n)) {
      --b;
    }
  }
};

// A CentralizedQueue driven by abstract timer fires.
class QueueSystem {
 public:
  QueueSystem(unsigned n, unsigned k, unsigned r) : queue_(n, k), r_(r) {}

  void arrive(double now) {
    effects_.clear();
    queue_.arrive(now, r_, ServerSet(), effects_);
  }

  void fire(ServerId s, double now) {
    if (queue_.server(s).mode != ServerMode::kBusy) return;
    effects_.clear();
    queue_.complete(s, now, RemovalCost(), effects_);
  }

  /// Server at busy-first slot `slot`: busy ids ascending, then the rest.
  ServerId busy_first(unsigned slot) const {
    const unsigned n = queue_.servers();
    unsigned seen = 0;
    for (int pass = 0; pass < 2; ++pass) {
      for (ServerId s = 0; s < n; ++s) {
        const bool busy = queue_.server(s).mode == ServerMode::kBusy;
        if (busy == (pass == 0) && seen++ == slot) return s;
      }
    }
    return kNoServer;
  }

  ServerId labelled(unsigned label, ServerLabeling labeling) const {
    if (labeling == ServerLabeling::kFixed) return label;
    const unsigned n = queue_.servers();
    // (idle, batch, id); batch ids grow with arrival order.
    std::array<std::tuple<bool, BatchId, ServerId>, kMaxServers> order;
    for (ServerId s = 0; s < n; ++s) {
      const ServerView& v = queue_.server(s);
      const bool busy = v.mode == ServerMode::kBusy;
      order[s] = {!busy, busy ? v.batch : 0, s};
    }
    std::nth_element(order.begin(), order.begin() + label, order.begin() + n);
    return std::get<2>(order[label]);
  }

  std::uint64_t batches() const { return queue_.in_system(); }

 private:
  CentralizedQueue queue_;
  unsigned r_;
  std::vector<Effect> effects_;
};

}  // namespace

DominanceVerdict compare_counts(std::span<const std::uint64_t> b1, std::span<const std::uint64_t> b2) {
  DominanceVerdict v;
  const std::size_t len = std::min(b1.size(), b2.size());
  for (std::size_t z = 0; z < len; ++z) {
    if (b1[z] < b2[z] && v.holds) {
      v.holds = false;
      v.first_violation = z;
    }
    if (b1[z] > b2[z]) v.strict = true;
  }
  return v;
}

ReplayOutcome replay_k1(unsigned n, unsigned r1, unsigned r2, std::span<const ReplayEvent> events) {
  check_k1(n, r1, r2);
  check_events(n, events);
  ReplayOutcome out;
  out.trace.events.assign(events.begin(), events.end());
  out.trace.b1.reserve(events.size());
  out.trace.b2.reserve(events.size());
  OccupancySystem s1{n, r1};
  OccupancySystem s2{n, r2};
  for (const ReplayEvent& e : events) {
    s1.apply(e);
    s2.apply(e);
    out.trace.b1.push_back(s1.b);
    out.trace.b2.push_back(s2.b);
  }
  out.verdict = compare_counts(out.trace.b1, out.trace.b2);
  return out;
}

ReplayOutcome replay_k1_permuted(unsigned n, unsigned r1, unsigned r2, std::span<const ReplayEvent> events) {
  check_k1(n, r1, r2);
  check_events(n, events);
  ReplayOutcome out;
  out.trace.events.assign(events.begin(), events.end());
  QueueSystem s1(n, 1, r1);
  QueueSystem s2(n, 1, r2);
  double now = 0;
  for (const ReplayEvent& e : events) {
    now += 1;
    if (e.is_arrival()) {
      s1.arrive(now);
      s2.arrive(now);
    } else {
      s1.fire(s1.busy_first(e.index), now);
      s2.fire(s2.busy_first(e.index), now);
    }
    out.trace.b1.push_back(s1.batches());
    out.trace.b2.push_back(s2.batches());
  }
  out.verdict = compare_counts(out.trace.b1, out.trace.b2);
  return out;
}

std::string_view to_string(ServerLabeling labeling) {
  return labeling == ServerLabeling::kFixed ? "fixed" : "oldest-first";
}

ServerLabeling parse_server_labeling(std::string_view text) {
  if (text == "fixed") return ServerLabeling::kFixed;
  if (text == "oldest-first") return ServerLabeling::kOldestBatchFirst;
  throw ParseError("labeling: expected 'fixed' or 'oldest-first', got '" + std::string(text) + "'");
}

ReplayOutcome replay_general_k(unsigned n, unsigned k, unsigned r_alt, std::span<const ReplayEvent> events,
                               ServerLabeling labeling) {
  check_general(n, k, r_alt);
  check_events(n, events);
  ReplayOutcome out;
  out.trace.events.assign(events.begin(), events.end());
  QueueSystem a(n, k, r_alt);
  QueueSystem b(n, k, n);
  double now = 0;
  for (const ReplayEvent& e : events) {
    now += 1;
    if (e.is_arrival()) {
      a.arrive(now);
      b.arrive(now);
    } else {
      a.fire(a.labelled(e.index, labeling), now);
      b.fire(b.labelled(e.index, labeling), now);
    }
    out.trace.b1.push_back(a.batches());
    out.trace.b2.push_back(b.batches());
  }
  out.verdict = compare_counts(out.trace.b1, out.trace.b2);
  return out;
}

std::vector<ReplayEvent> random_event_sequence(unsigned n, std::size_t length, Rng& rng) {
  std::vector<ReplayEvent> events;
  events.reserve(length);
  for (std::size_t i = 0; i < length; ++i) events.push_back(draw_event(n, rng));
  return events;
}

std::string to_string(const ReplayEvent& e) {
  return e.is_arrival() ? std::string("A") : "T" + std::to_string(e.index);
}

std::vector<ReplayEvent> parse_event_sequence(std::istream& in, unsigned n) {
  std::vector<ReplayEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto fail = [&](const std::string& what) {
      throw ParseError("line " + std::to_string(line_no) + ": " + what);
    };
    if (text == "A") {
      events.push_back(ReplayEvent::arrival());
      continue;
    }
    if (text.front() != 'T' || text.size() < 2) fail("expected 'A' or 'T<i>', got '" + std::string(text) + "'");
    unsigned index = 0;
    const char* first = text.data() + 1;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec != std::errc{} || ptr != last) fail("bad timer index in '" + std::string(text) + "'");
    if (index >= n) fail("timer index " + std::to_string(index) + " out of range for n=" + std::to_string(n));
    events.push_back(ReplayEvent::timer(index));
  }
  return events;
}

std::vector<ReplayEvent> load_event_sequence(const std::filesystem::path& path, unsigned n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open event file '" + path.string() + "'");
  try {
    return parse_event_sequence(in, n);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_event_sequence(std::ostream& out, std::span<const ReplayEvent> events) {
  for (const ReplayEvent& e : events) out << to_string(e) << '\n';
}

SweepReport sweep_k1(unsigned n, unsigned r1, unsigned r2, std::uint64_t sequences, std::size_t length,
                     std::uint64_t seed) {
  check_k1(n, r1, r2);
  SweepReport report;
  for (std::uint64_t i = 0; i < sequences; ++i) {
    Rng rng = make_stream(seed, i, Stream::kReplay);
    OccupancySystem s1{n, r1};
    OccupancySystem s2{n, r2};
    bool violated = false;
    bool strict = false;
    for (std::size_t z = 0; z < length; ++z) {
      const ReplayEvent e = draw_event(n, rng);
      s1.apply(e);
      s2.apply(e);
      if (s1.b < s2.b && !violated) {
        violated = true;
        if (!report.first_violation) report.first_violation = SweepViolation{i, z};
      }
      strict = strict || s1.b > s2.b;
    }
    ++report.sequences;
    report.events += length;
    report.violations += violated;
    report.strict_sequences += strict;
  }
  return report;
}

SweepReport sweep_general_k(unsigned n, unsigned k, unsigned r_alt, std::uint64_t sequences, std::size_t length,
                            std::uint64_t seed, ServerLabeling labeling) {
  check_general(n, k, r_alt);
  SweepReport report;
  for (std::uint64_t i = 0; i < sequences; ++i) {
    Rng rng = make_stream(seed, i, Stream::kReplay);
    QueueSystem a(n, k, r_alt);
    QueueSystem b(n, k, n);
    bool violated = false;
    bool strict = false;
    double now = 0;
    for (std::size_t z = 0; z < length; ++z) {
      const ReplayEvent e = draw_event(n, rng);
      now += 1;
      if (e.is_arrival()) {
        a.arrive(now);
        b.arrive(now);
      } else {
        a.fire(a.labelled(e.index, labeling), now);
        b.fire(b.labelled(e.index, labeling), now);
      }
      if (a.batches() < b.batches() && !violated) {
        violated = true;
        if (!report.first_violation) report.first_violation = SweepViolation{i, z};
      }
      strict = strict || a.batches() > b.batches();
    }
    ++report.sequences;
    report.events += length;
    report.violations += violated;
    report.strict_sequences += strict;
  }
  return report;
}

}  // namespace redq

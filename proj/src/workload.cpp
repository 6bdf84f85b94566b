#include "redq/workload.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "redq/detail/text.hpp"
#include "redq/error.hpp"

namespace redq {

void validate(const ArrivalProcess& process) {
  if (const auto* p = std::get_if<PoissonArrivals>(&process)) {
    if (!(std::isfinite(p->rate) && p->rate > 0)) throw ValidationError("poisson: rate must be > 0");
  } else if (const auto* d = std::get_if<DeterministicArrivals>(&process)) {
    if (!(std::isfinite(d->interval) && d->interval > 0)) {
      throw ValidationError("deterministic: interval must be > 0");
    }
  } else if (const auto* t = std::get_if<TraceArrivals>(&process)) {
    double last = 0;
    for (double x : t->times) {
      if (!(std::isfinite(x) && x >= 0)) throw ValidationError("trace: times must be non-negative");
      if (x < last) throw ValidationError("trace: times must be non-decreasing");
      last = x;
    }
  }
}

std::vector<double> parse_arrival_trace(std::istream& in) {
  std::vector<double> times;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    double t = 0;
    try {
      t = detail::parse_number(text, "arrival time");
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!(std::isfinite(t) && t >= 0)) {
      throw ParseError("line " + std::to_string(line_no) + ": arrival time must be non-negative");
    }
    if (!times.empty() && t < times.back()) {
      throw ParseError("line " + std::to_string(line_no) + ": arrival times must be sorted");
    }
    times.push_back(t);
  }
  return times;
}

ArrivalProcess parse_arrival_process(std::string_view text) {
  if (detail::trim(text) == "none") return NoArrivals{};
  const auto call = detail::parse_call(text);
  if (call.args.size() != 1) throw ParseError(call.name + ": expected one argument");
  ArrivalProcess process;
  if (call.name == "poisson") {
    process = PoissonArrivals{detail::parse_number(call.args[0], "poisson")};
  } else if (call.name == "deterministic") {
    process = DeterministicArrivals{detail::parse_number(call.args[0], "deterministic")};
  } else if (call.name == "trace") {
    std::ifstream in(call.args[0]);
    if (!in) throw ParseError("trace: cannot open '" + call.args[0] + "'");
    process = TraceArrivals{parse_arrival_trace(in)};
  } else {
    throw ParseError("unknown arrival process '" + call.name + "'");
  }
  validate(process);
  return process;
}

std::string to_string(const ArrivalProcess& process) {
  if (const auto* p = std::get_if<PoissonArrivals>(&process)) {
    return "poisson(" + detail::format_number(p->rate) + ")";
  }
  if (const auto* d = std::get_if<DeterministicArrivals>(&process)) {
    return "deterministic(" + detail::format_number(d->interval) + ")";
  }
  if (std::holds_alternative<TraceArrivals>(process)) return "trace";
  return "none";
}

ArrivalGenerator::ArrivalGenerator(ArrivalProcess process, Rng rng)
    : process_(std::move(process)), rng_(rng) {
  validate(process_);
}

std::optional<double> ArrivalGenerator::next_arrival() {
  if (const auto* p = std::get_if<PoissonArrivals>(&process_)) {
    last_ += -std::log(rng_.uniform()) / p->rate;
    return last_;
  }
  if (const auto* d = std::get_if<DeterministicArrivals>(&process_)) {
    ++index_;
    return static_cast<double>(index_) * d->interval;
  }
  if (const auto* t = std::get_if<TraceArrivals>(&process_)) {
    if (index_ >= t->times.size()) return std::nullopt;
    return t->times[index_++];
  }
  return std::nullopt;
}

LoadRegime parse_regime(std::string_view text) {
  if (detail::trim(text) == "open") return OpenRegime{};
  const auto call = detail::parse_call(text);
  if (call.name != "saturated" || call.args.size() != 1) {
    throw ParseError("regime must be 'open' or 'saturated(B0)'");
  }
  const double b0 = detail::parse_number(call.args[0], "saturated");
  if (!(b0 >= 1) || b0 != std::floor(b0)) throw ValidationError("saturated: backlog must be an integer >= 1");
  return SaturatedRegime{static_cast<std::uint64_t>(b0)};
}

std::string to_string(const LoadRegime& regime) {
  if (const auto* s = std::get_if<SaturatedRegime>(&regime)) {
    return "saturated(" + std::to_string(s->backlog) + ")";
  }
  return "open";
}

std::uint64_t saturated_measured_departures(std::uint64_t backlog) {
  return std::max<std::uint64_t>(1, backlog * 8 / 10);
}

ServerSet sample_eligible_set(unsigned m, unsigned n, Rng& rng) {
  if (m > n) throw ValidationError("eligible-set size exceeds n");
  if (m == n) return ServerSet::all(n);
  // Partial Fisher-Yates.
  std::vector<ServerId> ids(n);
  for (ServerId i = 0; i < n; ++i) ids[i] = i;
  ServerSet chosen;
  for (unsigned i = 0; i < m; ++i) {
    const auto j = i + rng.below(n - i);
    std::swap(ids[i], ids[j]);
    chosen.insert(ids[i]);
  }
  return chosen;
}

namespace {

void check_degree(unsigned r, unsigned k, unsigned limit) {
  if (r < k) {
    throw InvalidRequestDegree("request degree " + std::to_string(r) + " is below k=" + std::to_string(k));
  }
  if (r > limit) {
    throw InvalidRequestDegree("request degree " + std::to_string(r) + " exceeds eligible set of " +
                               std::to_string(limit));
  }
}

}  // namespace

unsigned request_degree(const RequestDegreePolicy& policy, std::uint64_t batch_index, unsigned k,
                        unsigned limit) {
  unsigned r = 0;
  if (const auto* f = std::get_if<FixedDegree>(&policy)) {
    r = f->r;
  } else {
    const auto& list = std::get<PerBatchDegrees>(policy).degrees;
    if (list.empty()) throw InvalidRequestDegree("per-batch degree list is empty");
    r = list[batch_index % list.size()];
  }
  check_degree(r, k, limit);
  return r;
}

void validate_request_degree(const RequestDegreePolicy& policy, unsigned k, unsigned limit) {
  if (const auto* f = std::get_if<FixedDegree>(&policy)) {
    check_degree(f->r, k, limit);
    return;
  }
  const auto& list = std::get<PerBatchDegrees>(policy).degrees;
  if (list.empty()) throw InvalidRequestDegree("per-batch degree list is empty");
  for (unsigned r : list) check_degree(r, k, limit);
}

}  // namespace redq

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "redq/model.hpp"
#include "redq/rng.hpp"

namespace redq {

struct PoissonArrivals {
  double rate;
  bool operator==(const PoissonArrivals&) const = default;
};
struct DeterministicArrivals {
  double interval;
  bool operator==(const DeterministicArrivals&) const = default;
};
struct TraceArrivals {
  std::vector<double> times;  // non-decreasing
  bool operator==(const TraceArrivals&) const = default;
};
struct NoArrivals {
  bool operator==(const NoArrivals&) const = default;
};

using ArrivalProcess = std::variant<PoissonArrivals, DeterministicArrivals, TraceArrivals, NoArrivals>;

void validate(const ArrivalProcess& process);

/// "poisson(rate)", "deterministic(interval)", "none", or "trace(path)"
/// (the file is read immediately).
ArrivalProcess parse_arrival_process(std::string_view text);
std::string to_string(const ArrivalProcess& process);

/// One non-negative decimal time per line, non-decreasing. Blank lines are
/// ignored. Errors carry the 1-based line number.
std::vector<double> parse_arrival_trace(std::istream& in);

/// Produces absolute arrival times. Arrivals never depend on system state.
class ArrivalGenerator {
 public:
  ArrivalGenerator(ArrivalProcess process, Rng rng);
  std::optional<double> next_arrival();

 private:
  ArrivalProcess process_;
  Rng rng_;
  double last_ = 0;
  std::size_t index_ = 0;
};

struct OpenRegime {
  bool operator==(const OpenRegime&) const = default;
};
/// `backlog` batches present at t = 0 and no further arrivals.
struct SaturatedRegime {
  std::uint64_t backlog;
  bool operator==(const SaturatedRegime&) const = default;
};
using LoadRegime = std::variant<OpenRegime, SaturatedRegime>;

LoadRegime parse_regime(std::string_view text);
std::string to_string(const LoadRegime& regime);

/// Departures measured in a saturated run: the first 80% of the backlog.
std::uint64_t saturated_measured_departures(std::uint64_t backlog);

/// Uniform m-subset of {0..n-1}, fresh per call.
ServerSet sample_eligible_set(unsigned m, unsigned n, Rng& rng);

struct FixedDegree {
  unsigned r;
  bool operator==(const FixedDegree&) const = default;
};
/// Batch i uses degrees[i % size].
struct PerBatchDegrees {
  std::vector<unsigned> degrees;
  bool operator==(const PerBatchDegrees&) const = default;
};
using RequestDegreePolicy = std::variant<FixedDegree, PerBatchDegrees>;

/// r for the given batch; throws InvalidRequestDegree unless k <= r <= limit.
unsigned request_degree(const RequestDegreePolicy& policy, std::uint64_t batch_index, unsigned k,
                        unsigned limit);

/// Throws InvalidRequestDegree if any degree the policy can produce is out
/// of [k, limit].
void validate_request_degree(const RequestDegreePolicy& policy, unsigned k, unsigned limit);

}  // namespace redq

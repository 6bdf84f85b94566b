#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "redq/config.hpp"
#include "redq/simulation.hpp"

namespace redq {

/// Aggregate over independent replications.
struct LatencyStats {
  std::uint64_t count = 0;  // measured departures, all replications
  double mean = 0;          // mean of the replication means
  double variance = 0;      // sample variance of the replication means
  /// Student-t 95% half-width over replication means; nullopt with one run.
  std::optional<double> ci_half_width;
  double throughput = 0;
  double time_average_occupancy = 0;
  /// P(B > x), x = 0, 1, ..., pooled over replications by time.
  std::vector<double> occupancy_ccdf;
  std::vector<double> replication_means;

  double ci_low() const { return mean - ci_half_width.value_or(0.0); }
  double ci_high() const { return mean + ci_half_width.value_or(0.0); }
};

/// Two-sided 95% t quantile times s / sqrt(R). Throws InsufficientReplications
/// for fewer than two values.
double ci_half_width(std::span<const double> replication_means);

LatencyStats summarize(std::span<const RunResult> runs);

/// P(B > x) from time-at-level totals.
std::vector<double> occupancy_ccdf(std::span<const double> time_at_level);

enum class Dominance { kADominatesB, kBDominatesA, kIncomparable };

std::string_view to_string(Dominance d);

/// A dominates B iff a[x] >= b[x] - slack everywhere and a[x] > b[x] + slack
/// somewhere. The shorter ccdf is extended with zeros.
Dominance dominance_check(std::span<const double> ccdf_a, std::span<const double> ccdf_b,
                          double slack = 0.01);

/// True when the two 95% intervals do not overlap and a lies below b.
bool strictly_below(const LatencyStats& a, const LatencyStats& b);

struct PolicyRow {
  unsigned r;
  LatencyStats stats;
};

/// Runs `config` once per request degree (all other settings, including the
/// seed and hence the arrival streams, shared).
std::vector<PolicyRow> compare_policies(const SystemConfig& config, std::span<const unsigned> degrees);

}  // namespace redq

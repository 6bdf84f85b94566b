#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "redq/config.hpp"
#include "redq/model.hpp"

namespace redq {

/// Outcome of one replication. Latency and occupancy statistics cover the
/// measured window only: open runs drop the first 10% of departures (or the
/// first 10% of simulated time under a time horizon); saturated runs measure
/// the first 80% of the backlog from t = 0.
struct RunResult {
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t events = 0;

  std::uint64_t measured = 0;
  double latency_sum = 0;
  double latency_sum_sq = 0;
  double measure_start = 0;
  double end_time = 0;
  /// occupancy_time[x] = time spent with exactly x batches in the system.
  std::vector<double> occupancy_time;

  /// Every departure, warm-up included.
  std::uint64_t all_departures = 0;
  double all_latency_sum = 0;

  /// Per-batch latencies of the measured window, when requested.
  std::vector<double> latencies;

  double mean_latency() const { return measured ? latency_sum / measured : 0.0; }
  double unwarmed_mean_latency() const { return all_departures ? all_latency_sum / all_departures : 0.0; }
  double throughput() const;
  double time_average_occupancy() const;
};

struct RunOptions {
  bool keep_latencies = false;
  /// Runs both models' self-checks after every event (slow).
  bool check_invariants = false;
  /// CSV trace sink: event_seq,time,kind,server_id,batch_id,buffer_len,in_system
  /// plus buffer_of_server in distributed mode.
  std::ostream* trace = nullptr;
  /// Stop after this many dispatched events.
  std::optional<std::uint64_t> max_events;
  /// Sees every effect, in order.
  std::function<void(double now, const Effect&)> on_effect;
};

RunResult simulate(const SystemConfig& config, std::uint64_t replication, const RunOptions& options = {});

/// All replications of `config` (replication indices 0..R-1), in order.
std::vector<RunResult> simulate_replications(const SystemConfig& config, unsigned threads = 0);

}  // namespace redq

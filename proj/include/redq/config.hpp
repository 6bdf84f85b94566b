#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "redq/distributed_queue.hpp"
#include "redq/distributions.hpp"
#include "redq/model.hpp"
#include "redq/workload.hpp"

namespace redq {

struct BatchHorizon {
  std::uint64_t batches;
  bool operator==(const BatchHorizon&) const = default;
};
struct TimeHorizon {
  double time;
  bool operator==(const TimeHorizon&) const = default;
};
/// Open runs stop after `batches` departures or at simulated `time`.
/// Saturated runs ignore it and stop after the measured prefix.
using Horizon = std::variant<BatchHorizon, TimeHorizon>;

struct SystemConfig {
  unsigned n = 1;
  unsigned k = 1;
  RequestDegreePolicy request_degree = FixedDegree{1};
  BufferMode buffer_mode = BufferMode::kCentral;
  DispatchPolicy dispatch = DispatchPolicy::kLeastLoaded;
  ServiceDistribution service = ServiceDistribution::exponential(1.0);
  ServiceDistribution removal = ServiceDistribution::constant(0.0);
  ArrivalProcess arrivals = NoArrivals{};
  LoadRegime regime = OpenRegime{};
  /// Size of the per-batch eligible server subset; nullopt means all n.
  std::optional<unsigned> m;
  std::uint64_t seed = 0;
  unsigned replications = 5;
  Horizon horizon = BatchHorizon{100'000};

  unsigned eligible_count() const { return m.value_or(n); }
  bool operator==(const SystemConfig&) const = default;
};

/// Checks every cross-field invariant; throws ValidationError naming the key.
void validate(const SystemConfig& config);

/// Parses and validates a JSON config; relative trace(...) paths resolve
/// against `base_dir`. Throws ParseError / ValidationError.
SystemConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SystemConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const SystemConfig& config);

/// Applies REDQ_SEED from the environment, if set.
void apply_seed_override(SystemConfig& config);

}  // namespace redq

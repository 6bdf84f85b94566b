#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "redq/config.hpp"
#include "redq/metrics.hpp"

namespace redq {

/// A named grid of runs: every buffer mode x sweep point x request degree.
/// Sweep points are Poisson rates, plus one saturated point when `backlog`
/// is set. All runs share the template's seed, so the arrival streams are
/// common across request degrees.
struct ExperimentPreset {
  std::string name;
  std::string description;
  SystemConfig base;
  std::vector<unsigned> degrees;
  std::vector<double> lambdas;
  std::optional<std::uint64_t> backlog;
  std::vector<BufferMode> buffer_modes{BufferMode::kCentral};
  std::string output;  // default CSV file name
};

const std::vector<std::string>& preset_names();

/// Throws ValidationError for an unknown name.
ExperimentPreset find_preset(std::string_view name);

struct PresetOverrides {
  std::optional<unsigned> replications;
  std::optional<std::uint64_t> batches;
  std::optional<std::uint64_t> backlog;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(ExperimentPreset& preset, const PresetOverrides& overrides);

struct ResultRow {
  unsigned r = 0;
  BufferMode buffer_mode = BufferMode::kCentral;
  std::optional<double> lambda;  // nullopt for a saturated run
  LatencyStats stats;
  unsigned replications = 0;
  std::uint64_t seed = 0;

  std::string regime_label() const;
};

/// Configuration of one grid cell.
SystemConfig point_config(const SystemConfig& base, BufferMode mode, std::optional<double> lambda,
                          std::optional<std::uint64_t> backlog, unsigned r);

using RowCallback = std::function<void(const ResultRow&)>;

std::vector<ResultRow> run_preset(const ExperimentPreset& preset, const RowCallback& on_row = {});

/// Open-regime sweep of `config` over request degrees and Poisson rates;
/// an empty `lambdas` keeps the config's own arrival process.
std::vector<ResultRow> sweep(const SystemConfig& config, std::span<const unsigned> degrees,
                             std::span<const double> lambdas, const RowCallback& on_row = {});

inline constexpr std::string_view kResultsHeader =
    "r,regime,lambda,mean_latency,ci_halfwidth,throughput,replications,seed";

void write_csv_row(std::ostream& out, const ResultRow& row);

/// Adjacent open-regime rates where the largest degree stops having a lower
/// mean latency than the smallest one. Compares means only.
struct CrossoverBracket {
  unsigned r_low;
  unsigned r_high;
  double last_below;
  double first_above;
};

std::optional<CrossoverBracket> crossover_bracket(std::span<const ResultRow> rows, BufferMode mode);

/// "# ..." audit lines (one resolved config per sweep point), then the
/// header and rows, then one "# crossover" line per buffer mode with open
/// rows.
void write_preset_csv(std::ostream& out, const ExperimentPreset& preset, std::span<const ResultRow> rows);

}  // namespace redq

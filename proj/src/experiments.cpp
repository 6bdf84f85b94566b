#include "redq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "redq/detail/text.hpp"
#include "redq/error.hpp"

namespace redq {

namespace {

std::vector<double> grid(double from, double to, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double x = from + i * step;
    if (x > to + 1e-9) break;
    // Round to kill accumulated binary noise in the CSV.
    out.push_back(std::round(x * 1e6) / 1e6);
  }
  return out;
}

SystemConfig open_template(unsigned n, unsigned k, ServiceDistribution service) {
  SystemConfig c;
  c.n = n;
  c.k = k;
  c.request_degree = FixedDegree{k};
  c.service = std::move(service);
  c.replications = 10;
  c.horizon = BatchHorizon{100'000};
  return c;
}

const ServiceDistribution& heavy_mixture() {
  static const ServiceDistribution d = ServiceDistribution::mixture({{0.2, 0.1}, {0.8, 1.0}});
  return d;
}

std::vector<ExperimentPreset> build_presets() {
  std::vector<ExperimentPreset> p;

  {
    ExperimentPreset e;
    e.name = "fig3";
    e.description = "n=10, k=5, exp(1) service, Poisson arrivals, r in {5,6,8,10}";
    e.base = open_template(10, 5, ServiceDistribution::exponential(1.0));
    e.degrees = {5, 6, 8, 10};
    e.lambdas = grid(0.25, 1.75, 0.25);
    e.lambdas.push_back(1.9);
    p.push_back(std::move(e));
  }
  {
    ExperimentPreset e;
    e.name = "fig4";
    e.description = "n=4, k=1, heavy-everywhere exponential mixture, r in 1..4";
    e.base = open_template(4, 1, heavy_mixture());
    e.degrees = {1, 2, 3, 4};
    e.lambdas = grid(0.1, 1.3, 0.1);
    p.push_back(std::move(e));
  }
  {
    ExperimentPreset e;
    e.name = "fig5";
    e.description = "n=4, k=1, light-everywhere shifted exponential, r in 1..4, plus a saturated point";
    e.base = open_template(4, 1, ServiceDistribution::shifted_exponential(1.0, 1.0));
    e.degrees = {1, 2, 3, 4};
    e.lambdas = grid(0.1, 0.7, 0.1);
    e.backlog = 10'000;
    p.push_back(std::move(e));
  }
  {
    ExperimentPreset e;
    e.name = "fig6";
    e.description = "n=4, k=1, exp(1) service with exp(10) removal cost, r in 1..4";
    e.base = open_template(4, 1, ServiceDistribution::exponential(1.0));
    e.base.removal = ServiceDistribution::exponential(10.0);
    e.degrees = {1, 2, 3, 4};
    e.lambdas = grid(0.25, 2.0, 0.25);
    p.push_back(std::move(e));
  }
  {
    ExperimentPreset e;
    e.name = "fig8";
    e.description = "n=20, m=10 eligible servers per batch, k=5, exp(1) service, r in {5,7,10}";
    e.base = open_template(20, 5, ServiceDistribution::exponential(1.0));
    e.base.m = 10;
    e.degrees = {5, 7, 10};
    e.lambdas = grid(0.5, 2.5, 0.5);
    p.push_back(std::move(e));
  }
  const auto saturated = [](std::string name, std::string description, SystemConfig base) {
    ExperimentPreset e;
    e.name = std::move(name);
    e.description = std::move(description);
    e.base = std::move(base);
    e.degrees = {1, 2, 3, 4};
    e.backlog = 10'000;
    e.buffer_modes = {BufferMode::kCentral, BufferMode::kDistributed};
    return e;
  };
  p.push_back(saturated("thm3", "saturated n=4, k=1, heavy-everywhere mixture, both buffer modes",
                        open_template(4, 1, heavy_mixture())));
  p.push_back(saturated("thm4", "saturated n=4, k=1, shifted exponential, both buffer modes",
                        open_template(4, 1, ServiceDistribution::shifted_exponential(1.0, 1.0))));
  {
    SystemConfig c = open_template(4, 1, ServiceDistribution::exponential(1.0));
    c.removal = ServiceDistribution::exponential(10.0);
    p.push_back(saturated("thm5", "saturated n=4, k=1, exp(1) service, exp(10) removal, both buffer modes", c));
  }
  for (auto& e : p) e.output = e.name + ".csv";
  return p;
}

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> all = build_presets();
  return all;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : presets()) out.push_back(p.name);
    return out;
  }();
  return names;
}

ExperimentPreset find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("preset: unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

void apply_overrides(ExperimentPreset& preset, const PresetOverrides& o) {
  if (o.replications) preset.base.replications = *o.replications;
  if (o.batches) preset.base.horizon = BatchHorizon{*o.batches};
  if (o.backlog && preset.backlog) preset.backlog = *o.backlog;
  if (o.seed) preset.base.seed = *o.seed;
}

std::string ResultRow::regime_label() const {
  return std::string(lambda ? "open-" : "saturated-") + std::string(to_string(buffer_mode));
}

SystemConfig point_config(const SystemConfig& base, BufferMode mode, std::optional<double> lambda,
                          std::optional<std::uint64_t> backlog, unsigned r) {
  SystemConfig c = base;
  c.buffer_mode = mode;
  c.request_degree = FixedDegree{r};
  if (lambda) {
    c.arrivals = PoissonArrivals{*lambda};
    c.regime = OpenRegime{};
  } else {
    c.arrivals = NoArrivals{};
    c.regime = SaturatedRegime{backlog.value_or(10'000)};
  }
  validate(c);
  return c;
}

namespace {

ResultRow run_point(const SystemConfig& c, std::optional<double> lambda) {
  const auto runs = simulate_replications(c);
  ResultRow row;
  row.r = std::get<FixedDegree>(c.request_degree).r;
  row.buffer_mode = c.buffer_mode;
  row.lambda = lambda;
  row.stats = summarize(runs);
  row.replications = c.replications;
  row.seed = c.seed;
  return row;
}

}  // namespace

std::vector<ResultRow> run_preset(const ExperimentPreset& preset, const RowCallback& on_row) {
  std::vector<std::optional<double>> points(preset.lambdas.begin(), preset.lambdas.end());
  if (preset.backlog) points.emplace_back(std::nullopt);
  std::vector<ResultRow> rows;
  for (BufferMode mode : preset.buffer_modes) {
    for (const auto& lambda : points) {
      for (unsigned r : preset.degrees) {
        rows.push_back(run_point(point_config(preset.base, mode, lambda, preset.backlog, r), lambda));
        if (on_row) on_row(rows.back());
      }
    }
  }
  return rows;
}

std::vector<ResultRow> sweep(const SystemConfig& config, std::span<const unsigned> degrees,
                             std::span<const double> lambdas, const RowCallback& on_row) {
  std::vector<ResultRow> rows;
  const auto run = [&](const SystemConfig& c, std::optional<double> lambda) {
    rows.push_back(run_point(c, lambda));
    if (on_row) on_row(rows.back());
  };
  if (lambdas.empty()) {
    std::optional<double> lambda;
    if (std::holds_alternative<OpenRegime>(config.regime)) {
      const auto* poisson = std::get_if<PoissonArrivals>(&config.arrivals);
      lambda = poisson ? poisson->rate : 0.0;
    }
    for (unsigned r : degrees) {
      SystemConfig c = config;
      c.request_degree = FixedDegree{r};
      validate(c);
      run(c, lambda);
    }
  }
  for (double lambda : lambdas) {
    for (unsigned r : degrees) run(point_config(config, config.buffer_mode, lambda, std::nullopt, r), lambda);
  }
  return rows;
}

void write_csv_row(std::ostream& out, const ResultRow& row) {
  out << row.r << ',' << row.regime_label() << ',';
  if (row.lambda) out << detail::format_number(*row.lambda);
  out << ',' << detail::format_number(row.stats.mean) << ',';
  if (row.stats.ci_half_width) out << detail::format_number(*row.stats.ci_half_width);
  out << ',' << detail::format_number(row.stats.throughput) << ',' << row.replications << ',' << row.seed << '\n';
}

std::optional<CrossoverBracket> crossover_bracket(std::span<const ResultRow> rows, BufferMode mode) {
  std::map<double, std::map<unsigned, double>> by_rate;
  for (const ResultRow& row : rows) {
    if (row.buffer_mode == mode && row.lambda) by_rate[*row.lambda][row.r] = row.stats.mean;
  }
  std::optional<double> previous;
  CrossoverBracket bracket{};
  for (const auto& [lambda, means] : by_rate) {
    if (means.size() < 2) continue;
    bracket.r_low = means.begin()->first;
    bracket.r_high = means.rbegin()->first;
    const bool redundant_wins = means.rbegin()->second < means.begin()->second;
    if (redundant_wins) {
      previous = lambda;
    } else if (previous) {
      bracket.last_below = *previous;
      bracket.first_above = lambda;
      return bracket;
    }
  }
  return std::nullopt;
}

void write_preset_csv(std::ostream& out, const ExperimentPreset& preset, std::span<const ResultRow> rows) {
  out << "# preset: " << preset.name << '\n';
  out << "# " << preset.description << '\n';
  out << "# degrees:";
  for (unsigned r : preset.degrees) out << ' ' << r;
  out << '\n';
  std::vector<std::optional<double>> points(preset.lambdas.begin(), preset.lambdas.end());
  if (preset.backlog) points.emplace_back(std::nullopt);
  for (BufferMode mode : preset.buffer_modes) {
    for (const auto& lambda : points) {
      const SystemConfig c = point_config(preset.base, mode, lambda, preset.backlog, preset.degrees.front());
      out << "# config: " << to_json(c).dump() << '\n';
    }
  }
  out << kResultsHeader << '\n';
  for (const ResultRow& row : rows) write_csv_row(out, row);
  if (preset.lambdas.empty() || preset.degrees.size() < 2) return;
  const unsigned lo = *std::min_element(preset.degrees.begin(), preset.degrees.end());
  const unsigned hi = *std::max_element(preset.degrees.begin(), preset.degrees.end());
  for (BufferMode mode : preset.buffer_modes) {
    out << "# crossover (" << to_string(mode) << "): ";
    if (const auto b = crossover_bracket(rows, mode)) {
      out << "r=" << b->r_high << " below r=" << b->r_low << " up to lambda=" << detail::format_number(b->last_below)
          << ", not from lambda=" << detail::format_number(b->first_above) << '\n';
    } else {
      out << "no switch between r=" << hi << " and r=" << lo << " on this grid\n";
    }
  }
}

}  // namespace redq

// Command-line front end: run, sweep, replay, classify, reproduce, trace,
// validate. Exit codes: 0 ok, 2 bad config or usage, 3 runtime failure,
// 4 a replay found a dominance violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "redq/config.hpp"
#include "redq/coupling.hpp"
#include "redq/detail/text.hpp"
#include "redq/distributions.hpp"
#include "redq/error.hpp"
#include "redq/experiments.hpp"
#include "redq/metrics.hpp"
#include "redq/simulation.hpp"

namespace {

using namespace redq;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitViolation = 4;

std::vector<unsigned> parse_degree_list(const std::string& text) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = detail::trim(item);
    unsigned r = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), r);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
      throw ParseError("--degrees: expected a comma-separated list of integers, got '" + text + "'");
    }
    out.push_back(r);
  }
  if (out.empty()) throw ParseError("--degrees: empty list");
  return out;
}

/// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(detail::parse_number(item, "--lambdas"));
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) {
      throw ParseError("--lambdas: expected from:to:step with step > 0, got '" + text + "'");
    }
    for (int i = 0;; ++i) {
      const double x = parts[0] + i * parts[2];
      if (x > parts[1] + 1e-9 * parts[2]) break;
      out.push_back(std::round(x * 1e9) / 1e9);
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_number(item, "--lambdas"));
  return out;
}

SystemConfig load(const std::string& path) {
  SystemConfig c = load_config(path);
  apply_seed_override(c);
  return c;
}

std::uint64_t env_seed_or(std::uint64_t fallback) {
  SystemConfig probe;
  probe.seed = fallback;
  apply_seed_override(probe);
  return probe.seed;
}

/// Opens `path` for writing, or returns std::cout for "-" / empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw Error("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_run(const std::string& path, const std::string& out_path) {
  const SystemConfig c = load(path);
  const auto runs = simulate_replications(c);
  ResultRow row;
  row.r = std::holds_alternative<FixedDegree>(c.request_degree) ? std::get<FixedDegree>(c.request_degree).r : 0;
  row.buffer_mode = c.buffer_mode;
  if (std::holds_alternative<OpenRegime>(c.regime)) {
    const auto* poisson = std::get_if<PoissonArrivals>(&c.arrivals);
    row.lambda = poisson ? poisson->rate : 0.0;
  }
  row.stats = summarize(runs);
  row.replications = c.replications;
  row.seed = c.seed;
  Output out(out_path);
  out.stream() << "# config: " << to_json(c).dump() << '\n' << kResultsHeader << '\n';
  write_csv_row(out.stream(), row);
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& degrees, const std::string& lambdas,
              const std::string& out_path) {
  const SystemConfig c = load(path);
  const auto rs = parse_degree_list(degrees);
  const auto ls = lambdas.empty() ? std::vector<double>{} : parse_lambda_list(lambdas);
  for (unsigned r : rs) {
    SystemConfig check = c;
    check.request_degree = FixedDegree{r};
    validate(check);
  }
  Output out(out_path);
  out.stream() << "# config: " << to_json(c).dump() << '\n' << kResultsHeader << '\n';
  sweep(c, rs, ls, [&](const ResultRow& row) {
    write_csv_row(out.stream(), row);
    out.stream().flush();
  });
  return 0;
}

struct ReplayArgs {
  std::string mode = "k1";
  unsigned n = 0;
  unsigned k = 1;
  std::optional<unsigned> r;
  std::optional<unsigned> r2;
  std::uint64_t sequences = 10'000;
  std::size_t length = 1'000;
  std::string file;
  std::optional<std::uint64_t> seed;
  std::string labeling = "oldest-first";
};

int cmd_replay(const ReplayArgs& a) {
  if (a.mode != "k1" && a.mode != "generalk") throw ValidationError("mode: expected k1 or generalk");
  if (a.n == 0) throw ValidationError("n: must be >= 1");
  const bool k1 = a.mode == "k1";
  const ServerLabeling labeling = parse_server_labeling(a.labeling);
  if (k1 && a.k != 1) throw ValidationError("k: mode k1 requires k = 1");

  // (r1, r2) pairs to check.
  std::vector<std::pair<unsigned, unsigned>> pairs;
  if (k1) {
    const unsigned lo = a.r.value_or(1);
    const unsigned hi = a.r.value_or(a.n - 1);
    for (unsigned r1 = lo; r1 <= hi; ++r1) {
      if (a.r2) {
        pairs.emplace_back(r1, *a.r2);
      } else {
        for (unsigned r2 = r1 + 1; r2 <= a.n; ++r2) pairs.emplace_back(r1, r2);
      }
    }
  } else {
    if (a.r) {
      pairs.emplace_back(*a.r, a.n);
    } else {
      for (unsigned r = a.k; r < a.n; ++r) pairs.emplace_back(r, a.n);
    }
  }
  if (pairs.empty()) throw ValidationError("r: no request-degree pair to compare for n=" + std::to_string(a.n));

  bool violated = false;
  if (!a.file.empty()) {
    const auto events = load_event_sequence(a.file, a.n);
    for (const auto& [r1, r2] : pairs) {
      const ReplayOutcome o = k1 ? replay_k1(a.n, r1, r2, events) : replay_general_k(a.n, a.k, r1, events, labeling);
      std::cout << "# mode=" << a.mode << " n=" << a.n << " k=" << a.k << " r1=" << r1 << " r2=" << r2 << '\n';
      std::cout << "z,event,b1,b2\n";
      for (std::size_t z = 0; z < events.size(); ++z) {
        std::cout << z << ',' << to_string(events[z]) << ',' << o.trace.b1[z] << ',' << o.trace.b2[z] << '\n';
      }
      std::cout << "dominance=" << (o.verdict.holds ? "holds" : "violated")
                << " strict=" << (o.verdict.strict ? "yes" : "no");
      if (o.verdict.first_violation) std::cout << " first_violation=" << *o.verdict.first_violation;
      std::cout << '\n';
      violated = violated || !o.verdict.holds;
    }
    return violated ? kExitViolation : 0;
  }

  const std::uint64_t seed = a.seed ? *a.seed : env_seed_or(0);
  std::cout << "mode,n,k,r1,r2,sequences,length,violations,strict_sequences,first_violation\n";
  for (const auto& [r1, r2] : pairs) {
    const SweepReport rep = k1 ? sweep_k1(a.n, r1, r2, a.sequences, a.length, seed)
                               : sweep_general_k(a.n, a.k, r1, a.sequences, a.length, seed, labeling);
    std::cout << a.mode << ',' << a.n << ',' << a.k << ',' << r1 << ',' << r2 << ',' << rep.sequences << ','
              << a.length << ',' << rep.violations << ',' << rep.strict_sequences << ',';
    if (rep.first_violation) std::cout << rep.first_violation->sequence << ':' << rep.first_violation->event;
    std::cout << '\n';
    violated = violated || rep.violations > 0;
  }
  return violated ? kExitViolation : 0;
}

int cmd_classify(const std::string& spec) {
  const ServiceDistribution d = parse_distribution(spec);
  const ClassReport rep = classify_everywhere(d);
  std::cout << "distribution: " << to_string(d) << '\n';
  std::cout << "verdict: " << to_string(rep.verdict) << " (on a grid of " << rep.points_checked << " points";
  if (rep.points_skipped) std::cout << ", " << rep.points_skipped << " skipped";
  std::cout << ", tolerance " << detail::format_number(rep.tolerance) << ")\n";
  const auto& w = rep.worst_violation;
  std::cout << "largest gap: a=" << detail::format_number(w.a) << " b=" << detail::format_number(w.b)
            << " P(X>a+b|X>b)=" << detail::format_number(w.lhs) << " P(X>a)=" << detail::format_number(w.rhs)
            << '\n';
  std::cout << "mean: " << detail::format_number(mean(d)) << '\n';
  for (unsigned n : {2U, 3U, 4U, 8U}) {
    std::cout << "E[min of " << n << "]: " << detail::format_number(min_of_n_mean(d, n, MinMeanMethod::kAnalytic))
              << '\n';
  }
  return 0;
}

int cmd_reproduce(const std::string& name, const PresetOverrides& overrides, const std::string& out_path,
                  bool verbose) {
  ExperimentPreset p = find_preset(name);
  PresetOverrides o = overrides;
  if (!o.seed) o.seed = env_seed_or(p.base.seed);
  apply_overrides(p, o);
  const std::string target = out_path.empty() ? p.output : out_path;
  const auto rows = run_preset(p, [&](const ResultRow& row) {
    if (verbose) write_csv_row(std::cerr, row);
  });
  // Written only once every run has finished, so a failed run leaves no
  // partial file behind.
  Output out(target);
  write_preset_csv(out.stream(), p, rows);
  if (target != "-") std::cerr << "wrote " << target << '\n';
  return 0;
}

int cmd_trace(const std::string& path, std::uint64_t events, std::uint64_t replication) {
  const SystemConfig c = load(path);
  RunOptions opts;
  opts.trace = &std::cout;
  opts.max_events = events;
  opts.check_invariants = true;
  simulate(c, replication, opts);
  return 0;
}

int cmd_validate(const std::string& path) {
  const SystemConfig c = load(path);
  std::cout << to_json(c).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and checkers for redundant-request queues"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;

  auto* run = app.add_subcommand("run", "Simulate a config and print a results row");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--out", out_path, "Output CSV (default stdout)");

  std::string degrees;
  std::string lambdas;
  auto* sw = app.add_subcommand("sweep", "Sweep request degrees (and Poisson rates)");
  sw->add_option("config", config_path, "JSON config file")->required();
  sw->add_option("--degrees", degrees, "Comma-separated request degrees")->required();
  sw->add_option("--lambdas", lambdas, "from:to:step or a comma list of arrival rates");
  sw->add_option("--out", out_path, "Output CSV (default stdout)");

  ReplayArgs ra;
  auto* rp = app.add_subcommand("replay", "Check batch-count dominance on event sequences");
  rp->add_option("--mode", ra.mode, "k1 or generalk")->check(CLI::IsMember({"k1", "generalk"}));
  rp->add_option("--n", ra.n, "Number of servers")->required();
  rp->add_option("--k", ra.k, "Jobs needed per batch");
  rp->add_option("--r", ra.r, "k1: smaller degree r1 (default: all); generalk: r_alt (default: all in [k, n))");
  rp->add_option("--r2", ra.r2, "k1: larger degree r2 (default: all above r1)");
  rp->add_option("--sequences", ra.sequences, "Random sequences per pair");
  rp->add_option("--len", ra.length, "Events per sequence");
  rp->add_option("--file", ra.file, "Replay one event file (A / T<i> per line) instead");
  rp->add_option("--seed", ra.seed, "Root seed (default REDQ_SEED or 0)");
  rp->add_option("--labeling", ra.labeling, "generalk: fixed or oldest-first server labels")
      ->check(CLI::IsMember({"fixed", "oldest-first"}));

  std::string spec;
  auto* cl = app.add_subcommand("classify", "Classify a service distribution");
  cl->add_option("spec", spec, "e.g. \"mixexp(0.2:0.1,0.8:1)\"")->required();

  std::string preset;
  PresetOverrides overrides;
  bool verbose = false;
  auto* rep = app.add_subcommand("reproduce", "Run a named experiment preset");
  rep->add_option("preset", preset, "fig3|fig4|fig5|fig6|fig8|thm3|thm4|thm5")->required();
  rep->add_option("--replications", overrides.replications, "Replications per point");
  rep->add_option("--batches", overrides.batches, "Batches per open-regime replication");
  rep->add_option("--backlog", overrides.backlog, "Initial backlog of saturated points");
  rep->add_option("--seed", overrides.seed, "Root seed (default REDQ_SEED or the preset's)");
  rep->add_option("--out", out_path, "Output CSV (default <preset>.csv, - for stdout)");
  rep->add_flag("--verbose", verbose, "Echo rows to stderr as they finish");

  std::uint64_t events = 50;
  std::uint64_t replication = 0;
  auto* tr = app.add_subcommand("trace", "Dump an event-level CSV trace");
  tr->add_option("config", config_path, "JSON config file")->required();
  tr->add_option("--events", events, "Number of events");
  tr->add_option("--replication", replication, "Replication index");

  auto* va = app.add_subcommand("validate", "Load and validate a config, echo it resolved");
  va->add_option("config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_path);
    if (*sw) return cmd_sweep(config_path, degrees, lambdas, out_path);
    if (*rp) return cmd_replay(ra);
    if (*cl) return cmd_classify(spec);
    if (*rep) return cmd_reproduce(preset, overrides, out_path, verbose);
    if (*tr) return cmd_trace(config_path, events, replication);
    if (*va) return cmd_validate(config_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

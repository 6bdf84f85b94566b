// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "golden_traces.hpp"
#include "oracles/ctmc.hpp"
#include "oracles/erlang.hpp"
#include "redq/coupling.hpp"
#include "redq/distributions.hpp"
#include "redq/experiments.hpp"
#include "redq/metrics.hpp"
#include "redq/simulation.hpp"

namespace {

using namespace redq;
using Clock = std::chrono::steady_clock;

const std::filesystem::path kData = REDQ_TEST_DATA;
const std::string kCli = REDQ_CLI;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [X]");
  }
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string with_ci(const LatencyStats& s) {
  return fmt(s.mean) + "+-" + fmt(s.ci_half_width.value_or(0.0), 2);
}

SystemConfig mm_config(unsigned r) {
  SystemConfig c;
  c.n = 4;
  c.k = 1;
  c.request_degree = FixedDegree{r};
  c.service = ServiceDistribution::exponential(1.0);
  c.arrivals = PoissonArrivals{2.0};
  c.seed = 20240601;
  c.replications = 10;
  c.horizon = BatchHorizon{120'000};
  return c;
}

LatencyStats run_stats(const SystemConfig& c) {
  const auto runs = simulate_replications(c);
  return summarize(runs);
}

SystemConfig saturated_config(const ServiceDistribution& service, const ServiceDistribution& removal,
                              BufferMode mode, unsigned r) {
  SystemConfig c;
  c.n = 4;
  c.k = 1;
  c.request_degree = FixedDegree{r};
  c.buffer_mode = mode;
  c.service = service;
  c.removal = removal;
  c.regime = SaturatedRegime{10'000};
  c.seed = 31337;
  c.replications = 10;
  return c;
}

// `lower` must sit strictly below `higher` in both buffer modes.
Verdict saturated_ordering(const ServiceDistribution& service, const ServiceDistribution& removal, unsigned lower,
                           unsigned higher) {
  Verdict v;
  for (BufferMode mode : {BufferMode::kCentral, BufferMode::kDistributed}) {
    const LatencyStats lo = run_stats(saturated_config(service, removal, mode, lower));
    const LatencyStats hi = run_stats(saturated_config(service, removal, mode, higher));
    v.require(strictly_below(lo, hi), std::string(to_string(mode)) + ": r=" + std::to_string(lower) + " " +
                                          with_ci(lo) + " < r=" + std::to_string(higher) + " " + with_ci(hi));
  }
  return v;
}

// Strictly decreasing means with pairwise disjoint intervals.
Verdict decreasing_in_r(const SystemConfig& base, const std::vector<unsigned>& degrees) {
  Verdict v;
  std::vector<LatencyStats> stats;
  std::string line;
  for (unsigned r : degrees) {
    SystemConfig c = base;
    c.request_degree = FixedDegree{r};
    stats.push_back(run_stats(c));
    line += (line.empty() ? "" : ", ") + ("r=" + std::to_string(r) + " " + with_ci(stats.back()));
  }
  bool ok = true;
  for (std::size_t i = 0; i + 1 < stats.size(); ++i) ok = ok && strictly_below(stats[i + 1], stats[i]);
  v.require(ok, line);
  return v;
}

Verdict criterion_1() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto runs = simulate_replications(mm_config(4));
  const LatencyStats s = summarize(runs);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(s.count >= 1'000'000, std::to_string(s.count) + " measured departures");
  v.require(std::abs(s.mean - 0.5) <= 0.05 * 0.5, "mean " + fmt(s.mean, 6) + " vs 0.5");
  v.require(secs <= 60, fmt(secs, 3) + " s");
  return v;
}

Verdict criterion_2() {
  Verdict v;
  const double expected = oracle::mmc_mean_latency(4, 2.0, 1.0);
  const LatencyStats s = run_stats(mm_config(1));
  v.require(s.count >= 1'000'000, std::to_string(s.count) + " measured departures");
  v.require(std::abs(s.mean - expected) <= 0.05 * expected, "mean " + fmt(s.mean, 6) + " vs " + fmt(expected, 6));
  return v;
}

Verdict criterion_3() {
  Verdict v;
  const auto t0 = Clock::now();
  std::uint64_t violations = 0;
  std::uint64_t sequences = 0;
  for (unsigned n = 2; n <= 6; ++n) {
    for (unsigned r1 = 1; r1 <= n; ++r1) {
      for (unsigned r2 = r1 + 1; r2 <= n; ++r2) {
        const SweepReport rep = sweep_k1(n, r1, r2, 10'000, 1'000, 1000 + 10 * n + r1);
        violations += rep.violations;
        sequences += rep.sequences;
      }
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(violations == 0, std::to_string(violations) + " violations in " + std::to_string(sequences) + " sequences");
  v.require(secs <= 60, fmt(secs, 3) + " s");
  return v;
}

Verdict criterion_4() {
  Verdict v;
  std::uint64_t violations = 0;
  std::uint64_t sequences = 0;
  std::uint64_t fixed_violations = 0;
  std::uint64_t fixed_sequences = 0;
  const std::vector<std::pair<unsigned, unsigned>> cases{{3, 2}, {4, 2}, {5, 3}};
  for (const auto& [n, k] : cases) {
    for (unsigned r_alt = k; r_alt < n; ++r_alt) {
      const SweepReport rep = sweep_general_k(n, k, r_alt, 10'000, 1'000, 2000 + 10 * n + r_alt);
      violations += rep.violations;
      sequences += rep.sequences;
      const SweepReport fixed =
          sweep_general_k(n, k, r_alt, 1'000, 1'000, 2000 + 10 * n + r_alt, ServerLabeling::kFixed);
      fixed_violations += fixed.violations;
      fixed_sequences += fixed.sequences;
    }
  }
  v.require(violations == 0, "oldest-first labels: " + std::to_string(violations) + " violations in " +
                                 std::to_string(sequences) + " sequences");
  v.detail += "; fixed labels (informational): " + std::to_string(fixed_violations) + " of " +
              std::to_string(fixed_sequences) + " sequences violate";
  return v;
}

Verdict criterion_5() {
  Verdict v;
  const auto events = load_event_sequence(kData / "strictness_witness.events", 2);
  const ReplayOutcome out = replay_k1(2, 1, 2, events);
  v.require(out.verdict.holds, "b1 >= b2 throughout");
  v.require(out.verdict.strict, "b1 > b2 somewhere");
  return v;
}

Verdict criterion_6() {
  Verdict v;
  const auto central = golden::central_walkthrough();
  const auto distributed = golden::distributed_walkthrough();
  std::string central_msg = "central walk-through";
  for (const auto& m : central) central_msg += " | " + m;
  std::string distributed_msg = "distributed walk-through";
  for (const auto& m : distributed) distributed_msg += " | " + m;
  v.require(central.empty(), central_msg);
  v.require(distributed.empty(), distributed_msg);
  return v;
}

Verdict criterion_7() {
  const auto t0 = Clock::now();
  SystemConfig c = find_preset("fig3").base;
  c.arrivals = PoissonArrivals{1.5};
  c.replications = 10;
  c.horizon = BatchHorizon{100'000};
  Verdict v = decreasing_in_r(c, {5, 6, 8, 10});
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(secs <= 600, fmt(secs, 3) + " s");
  return v;
}

Verdict criterion_8() {
  return saturated_ordering(ServiceDistribution::mixture({{0.2, 0.1}, {0.8, 1.0}}), ServiceDistribution::constant(0),
                            4, 1);
}

Verdict criterion_9() {
  const ServiceDistribution shift = ServiceDistribution::shifted_exponential(1, 1);
  Verdict v = saturated_ordering(shift, ServiceDistribution::constant(0), 1, 4);
  SystemConfig c;
  c.n = 4;
  c.k = 1;
  c.service = shift;
  c.arrivals = PoissonArrivals{0.2};
  c.seed = 77;
  c.replications = 10;
  c.horizon = BatchHorizon{100'000};
  c.request_degree = FixedDegree{4};
  const LatencyStats r4 = run_stats(c);
  c.request_degree = FixedDegree{1};
  const LatencyStats r1 = run_stats(c);
  v.require(strictly_below(r4, r1), "open lambda=0.2: r=4 " + with_ci(r4) + " < r=1 " + with_ci(r1));
  return v;
}

Verdict criterion_10() {
  return saturated_ordering(ServiceDistribution::exponential(1), ServiceDistribution::exponential(10), 1, 4);
}

Verdict criterion_11() {
  SystemConfig c = find_preset("fig8").base;
  Verdict v;
  v.require(c.n == 20 && c.k == 5 && c.m == 10u, "n=20, k=5, m=10");
  c.arrivals = PoissonArrivals{2.0};
  c.replications = 10;
  c.horizon = BatchHorizon{100'000};
  const Verdict d = decreasing_in_r(c, {5, 7, 10});
  v.require(d.pass, "lambda=2: " + d.detail);
  return v;
}

Verdict criterion_12() {
  Verdict v;
  struct Case {
    ServiceDistribution dist;
    EverywhereClass expected;
  };
  const std::vector<Case> cases{
      {ServiceDistribution::exponential(1), EverywhereClass::kBoth},
      {ServiceDistribution::mixture({{0.2, 0.1}, {0.8, 1.0}}), EverywhereClass::kHeavyEverywhere},
      {ServiceDistribution::weibull(0.5, 1), EverywhereClass::kHeavyEverywhere},
      {ServiceDistribution::shifted_exponential(1, 1), EverywhereClass::kLightEverywhere},
      {ServiceDistribution::uniform(0, 1), EverywhereClass::kLightEverywhere},
      {ServiceDistribution::constant(1), EverywhereClass::kLightEverywhere},
      {ServiceDistribution::two_point(1, 1.5, 0.5), EverywhereClass::kLightEverywhere},
  };
  int verdicts_ok = 0;
  int bounds_ok = 0;
  int bounds = 0;
  std::string wrong;
  for (const Case& c : cases) {
    const EverywhereClass got = classify_everywhere(c.dist).verdict;
    if (got == c.expected) {
      ++verdicts_ok;
    } else {
      wrong += " " + to_string(c.dist) + "->" + std::string(to_string(got));
    }
    for (unsigned n : {2U, 3U, 4U, 8U}) {
      const double m = min_of_n_mean(c.dist, n, MinMeanMethod::kAnalytic);
      const double bound = mean(c.dist) / n;
      bool ok = false;
      switch (c.expected) {
        case EverywhereClass::kBoth:
          ok = std::abs(m - bound) <= 1e-9;
          break;
        case EverywhereClass::kHeavyEverywhere:
          ok = m <= bound + 1e-12;
          break;
        case EverywhereClass::kLightEverywhere:
          ok = m >= bound - 1e-12;
          break;
        case EverywhereClass::kNeither:
          ok = true;
          break;
      }
      bounds_ok += ok;
      ++bounds;
    }
  }
  v.require(verdicts_ok == static_cast<int>(cases.size()),
            std::to_string(verdicts_ok) + "/" + std::to_string(cases.size()) + " class verdicts" + wrong);
  v.require(bounds_ok == bounds, std::to_string(bounds_ok) + "/" + std::to_string(bounds) + " min-of-n inequalities");
  return v;
}

double max_abs_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double gap = 0;
  for (std::size_t x = 0; x < std::max(a.size(), b.size()); ++x) {
    const double u = x < a.size() ? a[x] : 0.0;
    const double w = x < b.size() ? b[x] : 0.0;
    gap = std::max(gap, std::abs(u - w));
  }
  return gap;
}

Verdict criterion_13() {
  Verdict v;
  const LatencyStats r1 = run_stats(mm_config(1));
  const LatencyStats r4 = run_stats(mm_config(4));
  v.require(dominance_check(r1.occupancy_ccdf, r4.occupancy_ccdf) == Dominance::kADominatesB,
            "n=4 lambda=2: r=1 ccdf dominates r=4 (P(B>2) " + fmt(r1.occupancy_ccdf.at(2)) + " vs " +
                fmt(r4.occupancy_ccdf.size() > 2 ? r4.occupancy_ccdf[2] : 0.0) + ")");

  // n=2, lambda=1 against the exact chain.
  std::vector<std::vector<double>> exact;
  std::vector<std::vector<double>> simulated;
  for (unsigned r : {1U, 2U}) {
    SystemConfig c;
    c.n = 2;
    c.k = 1;
    c.request_degree = FixedDegree{r};
    c.arrivals = PoissonArrivals{1.0};
    c.seed = 5;
    c.replications = 10;
    c.horizon = BatchHorizon{100'000};
    simulated.push_back(run_stats(c).occupancy_ccdf);
    exact.push_back(oracle::ccdf_of(oracle::stationary_batch_count(2, 1, static_cast<int>(r), 1.0, 1.0, 60)));
    const double gap = max_abs_gap(simulated.back(), exact.back());
    v.require(gap <= 0.01, "n=2 r=" + std::to_string(r) + " simulated vs exact ccdf gap " + fmt(gap, 3));
  }
  v.require(dominance_check(exact[0], exact[1]) == Dominance::kADominatesB, "exact chain: r=1 dominates r=2");
  v.require(dominance_check(simulated[0], simulated[1]) == Dominance::kADominatesB,
            "simulated n=2: r=1 dominates r=2");
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict criterion_14() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / ("redq_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto a = dir / "fig3_a.csv";
  const auto b = dir / "fig3_b.csv";
  const std::string base = kCli + " reproduce fig3 --seed 4242 --out ";
  const int ca = std::system((base + a.string()).c_str());
  const int cb = std::system((base + b.string()).c_str());
  const std::string sa = slurp(a);
  const std::string sb = slurp(b);
  v.require(ca == 0 && cb == 0 && !sa.empty(), "reproduce fig3 ran twice");
  v.require(sa == sb, "byte-identical CSVs (" + std::to_string(sa.size()) + " bytes)");
  std::filesystem::remove_all(dir);

  const LatencyStats s = run_stats(mm_config(4));
  const double l = s.time_average_occupancy;
  const double lw = s.throughput * s.mean;
  v.require(std::abs(l / lw - 1.0) <= 0.02, "Little's law L=" + fmt(l, 5) + " vs lambda*W=" + fmt(lw, 5));
  return v;
}

// Dropping the warm-up prefix should barely move the M/M/1 pooled mean.
Verdict warmup_sanity() {
  Verdict v;
  const auto runs = simulate_replications(mm_config(4));
  const LatencyStats s = summarize(runs);
  double all_sum = 0;
  std::uint64_t all_count = 0;
  for (const RunResult& r : runs) {
    all_sum += r.all_latency_sum;
    all_count += r.all_departures;
  }
  const double unwarmed = all_sum / static_cast<double>(all_count);
  const double half = s.ci_half_width.value_or(0.0);
  v.require(std::abs(unwarmed - s.mean) < 0.5 * half,
            "with warm-up " + fmt(unwarmed, 6) + " vs without " + fmt(s.mean, 6) + ", half-width " + fmt(half, 3));
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"criterion 1 M/M/1 latency (k=1, r=n)", criterion_1},
      {"criterion 2 M/M/n latency vs Erlang C (r=1)", criterion_2},
      {"criterion 3 k=1 replay dominance", criterion_3},
      {"criterion 4 general-k replay dominance", criterion_4},
      {"criterion 5 strictness witness", criterion_5},
      {"criterion 6 golden walk-throughs", criterion_6},
      {"criterion 7 n=10 k=5 latency decreasing in r", criterion_7},
      {"criterion 8 heavy-everywhere saturated: r=4 below r=1", criterion_8},
      {"criterion 9 light-everywhere saturated: r=1 below r=4, open crossover", criterion_9},
      {"criterion 10 removal cost saturated: r=1 below r=4", criterion_10},
      {"criterion 11 restricted eligibility n=20 m=10 k=5", criterion_11},
      {"criterion 12 classifier verdicts and min-of-n bound", criterion_12},
      {"criterion 13 occupancy ccdf dominance", criterion_13},
      {"criterion 14 determinism and Little's law", criterion_14},
      {"extra: warm-up sanity", warmup_sanity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    failures += !v.pass;
    std::printf("%s %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu checks failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

#include "redq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "redq/error.hpp"

namespace redq {

double ci_half_width(std::span<const double> means) {
  if (means.size() < 2) throw InsufficientReplications("a confidence interval needs at least 2 replications");
  const double n = static_cast<double>(means.size());
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / n;
  double ss = 0;
  for (double m : means) ss += (m - mu) * (m - mu);
  const double sd = std::sqrt(ss / (n - 1));
  const boost::math::students_t dist(n - 1);
  return boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(n);
}

std::vector<double> occupancy_ccdf(std::span<const double> time_at_level) {
  const double total = std::accumulate(time_at_level.begin(), time_at_level.end(), 0.0);
  std::vector<double> ccdf(time_at_level.size(), 0.0);
  if (total <= 0) return ccdf;
  double above = total;
  for (std::size_t x = 0; x < time_at_level.size(); ++x) {
    above -= time_at_level[x];
    ccdf[x] = std::clamp(above / total, 0.0, 1.0);
  }
  // Guard against round-off making the tail non-monotone.
  for (std::size_t x = 1; x < ccdf.size(); ++x) ccdf[x] = std::min(ccdf[x], ccdf[x - 1]);
  return ccdf;
}

LatencyStats summarize(std::span<const RunResult> runs) {
  if (runs.empty()) throw InsufficientReplications("no replications to summarize");
  LatencyStats s;
  std::vector<double> pooled_time;
  double throughput = 0;
  double occupancy = 0;
  for (const RunResult& r : runs) {
    s.count += r.measured;
    s.replication_means.push_back(r.mean_latency());
    throughput += r.throughput();
    occupancy += r.time_average_occupancy();
    if (pooled_time.size() < r.occupancy_time.size()) pooled_time.resize(r.occupancy_time.size(), 0.0);
    for (std::size_t x = 0; x < r.occupancy_time.size(); ++x) pooled_time[x] += r.occupancy_time[x];
  }
  const double n = static_cast<double>(runs.size());
  s.mean = std::accumulate(s.replication_means.begin(), s.replication_means.end(), 0.0) / n;
  if (runs.size() > 1) {
    double ss = 0;
    for (double m : s.replication_means) ss += (m - s.mean) * (m - s.mean);
    s.variance = ss / (n - 1);
    s.ci_half_width = ci_half_width(s.replication_means);
  }
  s.throughput = throughput / n;
  s.time_average_occupancy = occupancy / n;
  s.occupancy_ccdf = occupancy_ccdf(pooled_time);
  return s;
}

std::string_view to_string(Dominance d) {
  switch (d) {
    case Dominance::kADominatesB:
      return "ADominatesB";
    case Dominance::kBDominatesA:
      return "BDominatesA";
    case Dominance::kIncomparable:
      return "Incomparable";
  }
  return "?";
}

Dominance dominance_check(std::span<const double> a, std::span<const double> b, double slack) {
  const std::size_t len = std::max(a.size(), b.size());
  const auto at = [](std::span<const double> v, std::size_t i) { return i < v.size() ? v[i] : 0.0; };
  bool a_ge = true;
  bool b_ge = true;
  bool a_strict = false;
  bool b_strict = false;
  for (std::size_t x = 0; x < len; ++x) {
    const double d = at(a, x) - at(b, x);
    a_ge = a_ge && d >= -slack;
    b_ge = b_ge && -d >= -slack;
    a_strict = a_strict || d > slack;
    b_strict = b_strict || -d > slack;
  }
  if (a_ge && a_strict) return Dominance::kADominatesB;
  if (b_ge && b_strict) return Dominance::kBDominatesA;
  return Dominance::kIncomparable;
}

bool strictly_below(const LatencyStats& a, const LatencyStats& b) {
  return a.ci_half_width && b.ci_half_width && a.ci_high() < b.ci_low();
}

std::vector<PolicyRow> compare_policies(const SystemConfig& config, std::span<const unsigned> degrees) {
  std::vector<PolicyRow> rows;
  for (unsigned r : degrees) {
    SystemConfig c = config;
    c.request_degree = FixedDegree{r};
    validate(c);
    const auto runs = simulate_replications(c);
    rows.push_back({r, summarize(runs)});
  }
  return rows;
}

}  // namespace redq

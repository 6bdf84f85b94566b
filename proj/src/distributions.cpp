#include "redq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "redq/detail/text.hpp"
#include "redq/error.hpp"

namespace redq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0; }
bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0; }

void validate(const DistributionLaw& law) {
  std::visit(Overloaded{
                 [](const Exponential& d) { require(finite_positive(d.rate), "exp: rate must be > 0"); },
                 [](const MixtureExponential& d) {
                   require(!d.components.empty(), "mixexp: needs at least one component");
                   double total = 0;
                   for (const auto& c : d.components) {
                     require(std::isfinite(c.weight) && c.weight > 0 && c.weight <= 1,
                             "mixexp: weights must lie in (0, 1]");
                     require(finite_positive(c.rate), "mixexp: rates must be > 0");
                     total += c.weight;
                   }
                   require(std::abs(total - 1.0) <= 1e-12, "mixexp: weights must sum to 1");
                 },
                 [](const ShiftedExponential& d) {
                   require(finite_nonneg(d.shift), "shiftexp: shift must be >= 0");
                   require(finite_positive(d.rate), "shiftexp: rate must be > 0");
                 },
                 [](const Uniform& d) {
                   require(finite_nonneg(d.lo), "uniform: lo must be >= 0");
                   require(std::isfinite(d.hi) && d.hi > d.lo, "uniform: hi must exceed lo");
                 },
                 [](const Constant& d) { require(finite_nonneg(d.value), "const: value must be >= 0"); },
                 [](const TwoPoint& d) {
                   require(finite_nonneg(d.low), "twopoint: c1 must be >= 0");
                   require(std::isfinite(d.high) && d.high > d.low, "twopoint: c2 must exceed c1");
                   require(d.prob_high >= 0 && d.prob_high <= 1, "twopoint: p2 must lie in [0, 1]");
                 },
                 [](const Weibull& d) {
                   require(std::isfinite(d.shape) && d.shape > 0 && d.shape <= 1,
                           "weibull: shape must lie in (0, 1]");
                   require(finite_positive(d.scale), "weibull: scale must be > 0");
                 },
             },
             law);
}

double exponential_draw(double rate, Rng& rng) { return -std::log(rng.uniform()) / rate; }

// Mixture draw; `age` reweights components by their survival at that age.
double mixture_draw(const MixtureExponential& d, double age, Rng& rng) {
  double total = 0;
  for (const auto& c : d.components) total += c.weight * std::exp(-c.rate * age);
  double u = rng.uniform() * total;
  for (const auto& c : d.components) {
    const double w = c.weight * std::exp(-c.rate * age);
    if (u < w) return exponential_draw(c.rate, rng);
    u -= w;
  }
  return exponential_draw(d.components.back().rate, rng);
}

double bisect_inverse(const ServiceDistribution& dist, double u) {
  double lo = 0;
  double hi = 1;
  while (survival(dist, hi) > u) {
    lo = hi;
    hi *= 2;
    if (hi > 1e300) return hi;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (survival(dist, mid) > u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4 * fm + fb);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double eps) {
  if (b <= a) return 0;
  // Seed with a fixed split so narrow features are not missed by the first
  // three samples.
  constexpr int kPieces = 16;
  double total = 0;
  const double h = (b - a) / kPieces;
  for (int i = 0; i < kPieces; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == kPieces) ? b : lo + h;
    const double fa = f(lo);
    const double fb = f(hi);
    const double fm = f(0.5 * (lo + hi));
    total += adaptive_simpson(f, lo, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb), eps / kPieces, 48);
  }
  return total;
}

// Integrate over [a, b] splitting at discontinuities of the survival function.
// The integrand is evaluated strictly inside each piece.
template <class F>
double integrate_piecewise(const F& f, double a, double b, const std::vector<double>& cuts,
                           double eps) {
  std::vector<double> pts{a};
  for (double c : cuts) {
    if (c > a && c < b) pts.push_back(c);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i];
    const double hi = pts[i + 1];
    const double pad = (hi - lo) * 1e-13;
    total += integrate(f, lo + pad, hi - pad, eps);
  }
  return total;
}

double analytic_min_mean(const ServiceDistribution& dist, unsigned n) {
  const double nn = n;
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return 1.0 / (nn * d.rate); },
          [&](const MixtureExponential& d) {
            // survival^n expands multinomially into a sum of exponentials.
            const std::size_t L = d.components.size();
            std::vector<unsigned> counts(L, 0);
            double total = 0;
            std::function<void(std::size_t, unsigned, double, double)> rec =
                [&](std::size_t i, unsigned left, double coeff, double rate) {
                  if (i + 1 == L) {
                    double c = coeff * std::pow(d.components[i].weight, left) / std::tgamma(left + 1.0);
                    total += c / (rate + left * d.components[i].rate);
                    return;
                  }
                  for (unsigned c = 0; c <= left; ++c) {
                    rec(i + 1, left - c,
                        coeff * std::pow(d.components[i].weight, c) / std::tgamma(c + 1.0),
                        rate + c * d.components[i].rate);
                  }
                };
            rec(0, n, std::tgamma(nn + 1.0), 0.0);
            return total;
          },
          [&](const ShiftedExponential& d) { return d.shift + 1.0 / (nn * d.rate); },
          [&](const Uniform& d) { return d.lo + (d.hi - d.lo) / (nn + 1.0); },
          [&](const Constant& d) { return d.value; },
          [&](const TwoPoint& d) { return d.low + (d.high - d.low) * std::pow(d.prob_high, nn); },
          [&](const Weibull& d) {
            return d.scale * std::tgamma(1.0 + 1.0 / d.shape) * std::pow(nn, -1.0 / d.shape);
          },
      },
      dist.law());
}

}  // namespace

ServiceDistribution::ServiceDistribution(DistributionLaw law) : law_(std::move(law)) { validate(law_); }

bool ServiceDistribution::is_zero() const {
  const auto* c = std::get_if<Constant>(&law_);
  return c != nullptr && c->value == 0;
}

double survival(const ServiceDistribution& dist, double x) {
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return x <= 0 ? 1.0 : std::exp(-d.rate * x); },
          [&](const MixtureExponential& d) {
            if (x <= 0) return 1.0;
            double s = 0;
            for (const auto& c : d.components) s += c.weight * std::exp(-c.rate * x);
            return std::min(s, 1.0);
          },
          [&](const ShiftedExponential& d) {
            return x < d.shift ? 1.0 : std::exp(-d.rate * (x - d.shift));
          },
          [&](const Uniform& d) {
            if (x < d.lo) return 1.0;
            if (x >= d.hi) return 0.0;
            return (d.hi - x) / (d.hi - d.lo);
          },
          [&](const Constant& d) { return x < d.value ? 1.0 : 0.0; },
          [&](const TwoPoint& d) {
            if (x < d.low) return 1.0;
            if (x < d.high) return d.prob_high;
            return 0.0;
          },
          [&](const Weibull& d) { return x <= 0 ? 1.0 : std::exp(-std::pow(x / d.scale, d.shape)); },
      },
      dist.law());
}

double residual_survival(const ServiceDistribution& dist, double age, double x) {
  const double s_age = survival(dist, age);
  if (s_age <= 0) {
    throw ConditioningOnNullEvent("residual law undefined: P(X > " + detail::format_number(age) +
                                  ") = 0");
  }
  if (std::holds_alternative<Exponential>(dist.law())) return survival(dist, x);
  return survival(dist, age + x) / s_age;
}

double inverse_survival(const ServiceDistribution& dist, double u) {
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return -std::log(u) / d.rate; },
          [&](const MixtureExponential&) { return bisect_inverse(dist, u); },
          [&](const ShiftedExponential& d) { return u >= 1 ? d.shift : d.shift - std::log(u) / d.rate; },
          [&](const Uniform& d) { return u >= 1 ? d.lo : d.hi - u * (d.hi - d.lo); },
          [&](const Constant& d) { return d.value; },
          [&](const TwoPoint& d) { return u >= d.prob_high ? d.low : d.high; },
          [&](const Weibull& d) { return u >= 1 ? 0.0 : d.scale * std::pow(-std::log(u), 1.0 / d.shape); },
      },
      dist.law());
}

double sample(const ServiceDistribution& dist, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return exponential_draw(d.rate, rng); },
                        [&](const MixtureExponential& d) { return mixture_draw(d, 0.0, rng); },
                        [&](const Constant& d) { return d.value; },
                        [&](const auto&) { return inverse_survival(dist, rng.uniform()); },
                    },
                    dist.law());
}

double sample_residual(const ServiceDistribution& dist, double age, Rng& rng) {
  const double s_age = survival(dist, age);
  if (s_age <= 0) {
    throw ConditioningOnNullEvent("residual law undefined: P(X > " + detail::format_number(age) +
                                  ") = 0");
  }
  if (const auto* e = std::get_if<Exponential>(&dist.law())) return exponential_draw(e->rate, rng);
  if (const auto* m = std::get_if<MixtureExponential>(&dist.law())) return mixture_draw(*m, age, rng);
  if (const auto* s = std::get_if<ShiftedExponential>(&dist.law()); s && age >= s->shift) {
    return exponential_draw(s->rate, rng);
  }
  const double x = inverse_survival(dist, rng.uniform() * s_age) - age;
  return std::max(0.0, x);
}

double mean(const ServiceDistribution& dist) {
  return std::visit(
      Overloaded{
          [](const Exponential& d) { return 1.0 / d.rate; },
          [](const MixtureExponential& d) {
            double m = 0;
            for (const auto& c : d.components) m += c.weight / c.rate;
            return m;
          },
          [](const ShiftedExponential& d) { return d.shift + 1.0 / d.rate; },
          [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
          [](const Constant& d) { return d.value; },
          [](const TwoPoint& d) { return d.low * (1 - d.prob_high) + d.high * d.prob_high; },
          [](const Weibull& d) { return d.scale * std::tgamma(1.0 + 1.0 / d.shape); },
      },
      dist.law());
}

std::vector<double> breakpoints(const ServiceDistribution& dist) {
  return std::visit(Overloaded{
                        [](const ShiftedExponential& d) { return std::vector<double>{d.shift}; },
                        [](const Uniform& d) { return std::vector<double>{d.lo, d.hi}; },
                        [](const Constant& d) { return std::vector<double>{d.value}; },
                        [](const TwoPoint& d) { return std::vector<double>{d.low, d.high}; },
                        [](const auto&) { return std::vector<double>{}; },
                    },
                    dist.law());
}

TailIntegral integrate_survival_power(const ServiceDistribution& dist, unsigned n) {
  constexpr double kTruncation = 1e-12;
  constexpr double kTailTolerance = 1e-10;
  constexpr double kEps = 1e-13;
  const auto f = [&](double x) { return std::pow(survival(dist, x), n); };
  const auto cuts = breakpoints(dist);

  double upper = std::max(1.0, mean(dist));
  for (double c : cuts) upper = std::max(upper, c);
  while (f(upper) >= kTruncation) {
    upper *= 2;
    if (upper > 1e15) throw IntegrationDivergence("survival^n does not decay below 1e-12");
  }

  double value = integrate_piecewise(f, 0.0, upper, cuts, kEps);
  double tail = integrate_piecewise(f, upper, 2 * upper, cuts, kEps);
  for (int i = 0; tail > kTailTolerance; ++i) {
    if (i == 60) throw IntegrationDivergence("truncated tail mass stays above tolerance");
    value += tail;
    upper *= 2;
    tail = integrate_piecewise(f, upper, 2 * upper, cuts, kEps);
  }
  return {value, upper, tail};
}

double min_of_n_mean(const ServiceDistribution& dist, unsigned n, MinMeanMethod method,
                     std::uint64_t seed) {
  if (n == 0) throw ValidationError("min_of_n_mean: n must be >= 1");
  switch (method) {
    case MinMeanMethod::kAnalytic:
      return analytic_min_mean(dist, n);
    case MinMeanMethod::kNumericIntegration:
      return integrate_survival_power(dist, n).value;
    case MinMeanMethod::kMonteCarlo: {
      constexpr std::size_t kSamples = 1'000'000;
      Rng rng(derive_seed(seed, 0, Stream::kMonteCarlo));
      double total = 0;
      for (std::size_t i = 0; i < kSamples; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (unsigned j = 0; j < n; ++j) m = std::min(m, sample(dist, rng));
        total += m;
      }
      return total / kSamples;
    }
  }
  return 0;
}

std::vector<GridPoint> default_classifier_grid(const ServiceDistribution& dist) {
  const double m = mean(dist) > 0 ? mean(dist) : 1.0;
  std::vector<double> scales;
  for (int e = -6; e <= 6; ++e) scales.push_back(std::ldexp(m, e));
  std::vector<double> bs{0.0};
  bs.insert(bs.end(), scales.begin(), scales.end());
  std::vector<GridPoint> grid;
  grid.reserve(scales.size() * bs.size());
  for (double a : scales) {
    for (double b : bs) grid.push_back({a, b});
  }
  return grid;
}

ClassReport classify_everywhere(const ServiceDistribution& dist, const std::vector<GridPoint>& grid,
                                double tolerance) {
  if (grid.empty()) throw ValidationError("classify_everywhere: grid is empty");
  ClassReport report{};
  report.tolerance = tolerance;
  bool heavy = true;
  bool light = true;
  double worst = -1;
  for (const auto& [a, b] : grid) {
    if (!(a > 0) || b < 0) throw ValidationError("classify_everywhere: need a > 0 and b >= 0");
    const double sb = survival(dist, b);
    if (sb <= 0) {
      ++report.points_skipped;
      continue;
    }
    ++report.points_checked;
    const double lhs = survival(dist, a + b) / sb;
    const double rhs = survival(dist, a);
    const double gap = lhs - rhs;
    heavy = heavy && gap >= -tolerance;
    light = light && gap <= tolerance;
    if (std::abs(gap) > worst) {
      worst = std::abs(gap);
      report.worst_violation = {a, b, lhs, rhs};
    }
  }
  if (heavy && light) {
    report.verdict = EverywhereClass::kBoth;
  } else if (heavy) {
    report.verdict = EverywhereClass::kHeavyEverywhere;
  } else if (light) {
    report.verdict = EverywhereClass::kLightEverywhere;
  } else {
    report.verdict = EverywhereClass::kNeither;
  }
  return report;
}

ClassReport classify_everywhere(const ServiceDistribution& dist, double tolerance) {
  return classify_everywhere(dist, default_classifier_grid(dist), tolerance);
}

std::string_view to_string(EverywhereClass verdict) {
  switch (verdict) {
    case EverywhereClass::kHeavyEverywhere:
      return "HeavyEverywhere";
    case EverywhereClass::kLightEverywhere:
      return "LightEverywhere";
    case EverywhereClass::kBoth:
      return "Both";
    case EverywhereClass::kNeither:
      return "Neither";
  }
  return "?";
}

ServiceDistribution parse_distribution(std::string_view text) {
  const auto call = detail::parse_call(text);
  const auto& args = call.args;
  const auto expect = [&](std::size_t count) {
    if (args.size() != count) {
      throw ParseError(call.name + ": expected " + std::to_string(count) + " argument(s), got " +
                       std::to_string(args.size()));
    }
  };
  const auto num = [&](std::size_t i) { return detail::parse_number(args[i], call.name); };

  if (call.name == "exp") {
    expect(1);
    return ServiceDistribution::exponential(num(0));
  }
  if (call.name == "mixexp") {
    if (args.empty()) throw ParseError("mixexp: needs at least one p:rate pair");
    std::vector<MixtureComponent> comps;
    for (const auto& arg : args) {
      const auto colon = arg.find(':');
      if (colon == std::string::npos) throw ParseError("mixexp: expected p:rate, got '" + arg + "'");
      comps.push_back({detail::parse_number(std::string_view(arg).substr(0, colon), "mixexp"),
                       detail::parse_number(std::string_view(arg).substr(colon + 1), "mixexp")});
    }
    return ServiceDistribution::mixture(std::move(comps));
  }
  if (call.name == "shiftexp") {
    expect(2);
    return ServiceDistribution::shifted_exponential(num(0), num(1));
  }
  if (call.name == "uniform") {
    expect(2);
    return ServiceDistribution::uniform(num(0), num(1));
  }
  if (call.name == "const") {
    expect(1);
    return ServiceDistribution::constant(num(0));
  }
  if (call.name == "twopoint") {
    expect(3);
    return ServiceDistribution::two_point(num(0), num(1), num(2));
  }
  if (call.name == "weibull") {
    expect(2);
    return ServiceDistribution::weibull(num(0), num(1));
  }
  throw ParseError("unknown distribution '" + call.name + "'");
}

std::string to_string(const ServiceDistribution& dist) {
  using detail::format_number;
  return std::visit(
      Overloaded{
          [](const Exponential& d) { return "exp(" + format_number(d.rate) + ")"; },
          [](const MixtureExponential& d) {
            std::string s = "mixexp(";
            for (std::size_t i = 0; i < d.components.size(); ++i) {
              if (i) s += ',';
              s += format_number(d.components[i].weight) + ":" + format_number(d.components[i].rate);
            }
            return s + ")";
          },
          [](const ShiftedExponential& d) {
            return "shiftexp(" + format_number(d.shift) + "," + format_number(d.rate) + ")";
          },
          [](const Uniform& d) { return "uniform(" + format_number(d.lo) + "," + format_number(d.hi) + ")"; },
          [](const Constant& d) { return "const(" + format_number(d.value) + ")"; },
          [](const TwoPoint& d) {
            return "twopoint(" + format_number(d.low) + "," + format_number(d.high) + "," +
                   format_number(d.prob_high) + ")";
          },
          [](const Weibull& d) {
            return "weibull(" + format_number(d.shape) + "," + format_number(d.scale) + ")";
          },
      },
      dist.law());
}

}  // namespace redq

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "redq/rng.hpp"

namespace redq {

struct Exponential {
  double rate;
  bool operator==(const Exponential&) const = default;
};

struct MixtureComponent {
  double weight;
  double rate;
  bool operator==(const MixtureComponent&) const = default;
};

struct MixtureExponential {
  std::vector<MixtureComponent> components;
  bool operator==(const MixtureExponential&) const = default;
};

struct ShiftedExponential {
  double shift;
  double rate;
  bool operator==(const ShiftedExponential&) const = default;
};

struct Uniform {
  double lo;
  double hi;
  bool operator==(const Uniform&) const = default;
};

struct Constant {
  double value;
  bool operator==(const Constant&) const = default;
};

/// Mass `prob_high` on `high`, the rest on `low`.
struct TwoPoint {
  double low;
  double high;
  double prob_high;
  bool operator==(const TwoPoint&) const = default;
};

struct Weibull {
  double shape;
  double scale;
  bool operator==(const Weibull&) const = default;
};

using DistributionLaw = std::variant<Exponential, MixtureExponential, ShiftedExponential,
                                     Uniform, Constant, TwoPoint, Weibull>;

/// A validated service-time or removal-time law. Parameters are checked once
/// at construction, so every free function below can assume a valid law.
class ServiceDistribution {
 public:
  /// Throws ValidationError when the parameters are out of range.
  explicit ServiceDistribution(DistributionLaw law);

  static ServiceDistribution exponential(double rate) { return ServiceDistribution(Exponential{rate}); }
  static ServiceDistribution mixture(std::vector<MixtureComponent> components) {
    return ServiceDistribution(MixtureExponential{std::move(components)});
  }
  static ServiceDistribution shifted_exponential(double shift, double rate) {
    return ServiceDistribution(ShiftedExponential{shift, rate});
  }
  static ServiceDistribution uniform(double lo, double hi) { return ServiceDistribution(Uniform{lo, hi}); }
  static ServiceDistribution constant(double value) { return ServiceDistribution(Constant{value}); }
  static ServiceDistribution two_point(double low, double high, double prob_high) {
    return ServiceDistribution(TwoPoint{low, high, prob_high});
  }
  static ServiceDistribution weibull(double shape, double scale) {
    return ServiceDistribution(Weibull{shape, scale});
  }

  const DistributionLaw& law() const { return law_; }

  /// True for the degenerate law at zero (the "no removal cost" default).
  bool is_zero() const;

  bool operator==(const ServiceDistribution&) const = default;

 private:
  DistributionLaw law_;
};

double sample(const ServiceDistribution& dist, Rng& rng);

/// P(X > x).
double survival(const ServiceDistribution& dist, double x);

/// P(X > age + x | X > age). Throws ConditioningOnNullEvent when
/// survival(age) == 0.
double residual_survival(const ServiceDistribution& dist, double age, double x);

/// Generalized inverse of the survival function: inf{x : P(X > x) <= u}.
double inverse_survival(const ServiceDistribution& dist, double u);

/// Draw of X - age conditioned on X > age, by inverse transform.
double sample_residual(const ServiceDistribution& dist, double age, Rng& rng);

double mean(const ServiceDistribution& dist);

/// Points where the survival function is not smooth (atoms, support ends).
std::vector<double> breakpoints(const ServiceDistribution& dist);

enum class MinMeanMethod { kAnalytic, kNumericIntegration, kMonteCarlo };

/// E[min of n i.i.d. draws]. The numeric route integrates survival(x)^n with
/// adaptive quadrature and throws IntegrationDivergence if the truncated tail
/// mass cannot be pushed below tolerance.
double min_of_n_mean(const ServiceDistribution& dist, unsigned n, MinMeanMethod method,
                     std::uint64_t seed = 0);

struct TailIntegral {
  double value;
  double truncated_at;
  double tail_mass_bound;
};

TailIntegral integrate_survival_power(const ServiceDistribution& dist, unsigned n);

// ---------------------------------------------------------------------------
// Heavy-everywhere / light-everywhere classification.

enum class EverywhereClass { kHeavyEverywhere, kLightEverywhere, kBoth, kNeither };

struct GridPoint {
  double a;
  double b;
};

struct GridViolation {
  double a = 0;
  double b = 0;
  double lhs = 0;  // P(X > a + b | X > b)
  double rhs = 0;  // P(X > a)
};

struct ClassReport {
  EverywhereClass verdict;
  /// Grid point with the largest |lhs - rhs|.
  GridViolation worst_violation;
  std::size_t points_checked = 0;
  std::size_t points_skipped = 0;
  double tolerance = 0;
  /// The verdict holds on the checked grid only; it is not a proof over all
  /// real (a, b).
  bool grid_verdict = true;
};

/// a in {2^-6..2^6} * mean, b in {0} and {2^-6..2^6} * mean.
std::vector<GridPoint> default_classifier_grid(const ServiceDistribution& dist);

ClassReport classify_everywhere(const ServiceDistribution& dist, const std::vector<GridPoint>& grid,
                                double tolerance = 1e-9);
ClassReport classify_everywhere(const ServiceDistribution& dist, double tolerance = 1e-9);

std::string_view to_string(EverywhereClass verdict);

// ---------------------------------------------------------------------------
// Text form used in config files:
//   exp(rate) mixexp(p1:r1,p2:r2,...) shiftexp(shift,rate) uniform(lo,hi)
//   const(c) twopoint(c1,c2,p2) weibull(shape,scale)

ServiceDistribution parse_distribution(std::string_view text);
std::string to_string(const ServiceDistribution& dist);

}  // namespace redq

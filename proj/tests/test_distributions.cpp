#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "redq/distributions.hpp"
#include "redq/error.hpp"
#include "redq/rng.hpp"

namespace redq {
namespace {

const ServiceDistribution kMixture = ServiceDistribution::mixture({{0.2, 0.1}, {0.8, 1.0}});

std::vector<ServiceDistribution> all_variants() {
  return {
      ServiceDistribution::exponential(1.5),
      kMixture,
      ServiceDistribution::shifted_exponential(1.0, 1.0),
      ServiceDistribution::uniform(0.5, 2.0),
      ServiceDistribution::constant(2.0),
      ServiceDistribution::two_point(1.0, 1.5, 0.3),
      ServiceDistribution::weibull(0.5, 1.0),
  };
}

TEST(Distributions, ParseAndPrintRoundTrip) {
  for (const char* text : {"exp(2)", "mixexp(0.2:0.1,0.8:1)", "shiftexp(1,1)", "uniform(0,1)", "const(2.5)",
                           "twopoint(1,1.5,0.5)", "weibull(0.5,1)"}) {
    const ServiceDistribution d = parse_distribution(text);
    EXPECT_EQ(to_string(d), text);
    EXPECT_EQ(parse_distribution(to_string(d)), d);
  }
  EXPECT_EQ(parse_distribution("  exp( 2 ) "), ServiceDistribution::exponential(2));
}

TEST(Distributions, RejectsBadSpecs) {
  EXPECT_THROW(parse_distribution("gamma(1,2)"), ParseError);
  EXPECT_THROW(parse_distribution("exp"), ParseError);
  EXPECT_THROW(parse_distribution("exp(x)"), ParseError);
  EXPECT_THROW(parse_distribution("exp(1,2)"), ParseError);
  EXPECT_THROW(parse_distribution("exp(-1)"), ValidationError);
  EXPECT_THROW(parse_distribution("exp(0)"), ValidationError);
  EXPECT_THROW(parse_distribution("mixexp(0.5:1,0.4:2)"), ValidationError);
  EXPECT_THROW(parse_distribution("mixexp(0.5,0.5)"), ParseError);
  EXPECT_THROW(parse_distribution("uniform(2,1)"), ValidationError);
  EXPECT_THROW(parse_distribution("weibull(2,1)"), ValidationError);
  EXPECT_THROW(parse_distribution("twopoint(1,2,1.5)"), ValidationError);
  EXPECT_THROW(parse_distribution("const(-1)"), ValidationError);
}

TEST(Distributions, SurvivalClosedForms) {
  EXPECT_DOUBLE_EQ(survival(ServiceDistribution::shifted_exponential(1, 1), 1.0), 1.0);
  EXPECT_NEAR(survival(ServiceDistribution::shifted_exponential(1, 1), 2.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(survival(ServiceDistribution::weibull(0.5, 1.0), 4.0), 0.1353352832366127, 1e-15);
  EXPECT_NEAR(survival(ServiceDistribution::exponential(2.0), 1.0), 0.1353352832366127, 1e-15);
  EXPECT_DOUBLE_EQ(survival(ServiceDistribution::uniform(0, 1), 0.25), 0.75);
  EXPECT_DOUBLE_EQ(survival(ServiceDistribution::constant(2), 1.999), 1.0);
  EXPECT_DOUBLE_EQ(survival(ServiceDistribution::constant(2), 2.0), 0.0);
  EXPECT_DOUBLE_EQ(survival(ServiceDistribution::two_point(1, 1.5, 0.3), 1.2), 0.3);
  EXPECT_NEAR(survival(kMixture, 3.0), 0.2 * std::exp(-0.3) + 0.8 * std::exp(-3.0), 1e-15);
  for (const auto& d : all_variants()) EXPECT_DOUBLE_EQ(survival(d, 0.0), 1.0) << to_string(d);
}

TEST(Distributions, SurvivalIsNonIncreasing) {
  for (const auto& d : all_variants()) {
    double prev = 1.0;
    for (double x = 0; x < 40; x += 0.01) {
      const double s = survival(d, x);
      ASSERT_LE(s, prev) << to_string(d) << " at " << x;
      ASSERT_GE(s, 0.0);
      prev = s;
    }
    EXPECT_LT(survival(d, 1e6), 1e-12) << to_string(d);
  }
}

TEST(Distributions, ResidualSurvival) {
  const auto e = ServiceDistribution::exponential(1.7);
  for (double age : {0.0, 0.3, 2.0, 9.0}) {
    for (double x : {0.0, 0.1, 1.0, 4.0}) {
      EXPECT_NEAR(residual_survival(e, age, x), survival(e, x), 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(residual_survival(ServiceDistribution::constant(2), 1.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(residual_survival(ServiceDistribution::uniform(0, 1), 0.5, 0.25), 0.5);
  EXPECT_THROW(residual_survival(ServiceDistribution::uniform(0, 1), 1.0, 0.1), ConditioningOnNullEvent);
  EXPECT_THROW(residual_survival(ServiceDistribution::constant(2), 2.0, 0.1), ConditioningOnNullEvent);
}

TEST(Distributions, Means) {
  EXPECT_DOUBLE_EQ(mean(ServiceDistribution::exponential(2)), 0.5);
  EXPECT_NEAR(mean(kMixture), 2.8, 1e-12);
  EXPECT_DOUBLE_EQ(mean(ServiceDistribution::two_point(1, 1.5, 0.5)), 1.25);
  EXPECT_DOUBLE_EQ(mean(ServiceDistribution::shifted_exponential(1, 1)), 2.0);
  EXPECT_NEAR(mean(ServiceDistribution::weibull(0.5, 1)), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(mean(ServiceDistribution::uniform(0, 1)), 0.5);
}

TEST(Distributions, SamplingMoments) {
  Rng rng(11);
  const auto draw_mean = [&](const ServiceDistribution& d, int count) {
    double s = 0;
    for (int i = 0; i < count; ++i) s += sample(d, rng);
    return s / count;
  };
  EXPECT_NEAR(draw_mean(ServiceDistribution::exponential(1.0), 1'000'000), 1.0, 0.01);
  const auto shifted = ServiceDistribution::shifted_exponential(1, 1);
  double s = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double x = sample(shifted, rng);
    ASSERT_GE(x, 1.0);
    s += x;
  }
  EXPECT_NEAR(s / 1e6, 2.0, 0.01);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(ServiceDistribution::constant(2.0), rng), 2.0);
}

TEST(Distributions, TwoPointConvention) {
  Rng rng(3);
  int high = 0;
  for (int i = 0; i < 100'000; ++i) {
    const double x = sample(ServiceDistribution::two_point(1, 1.5, 0.3), rng);
    ASSERT_TRUE(x == 1.0 || x == 1.5);
    high += x == 1.5;
  }
  EXPECT_NEAR(high / 1e5, 0.3, 0.005);
}

// Empirical survival of 10^6 inverse-transform draws against the closed form
// at 10 points spread over the bulk of each law.
TEST(Distributions, SamplesMatchSurvival) {
  for (const auto& d : all_variants()) {
    Rng rng(derive_seed(5, 0, Stream::kMonteCarlo));
    std::vector<double> xs(1'000'000);
    for (auto& x : xs) x = sample(d, rng);
    std::sort(xs.begin(), xs.end());
    double worst = 0;
    for (int i = 1; i <= 10; ++i) {
      const double x = inverse_survival(d, i / 11.0) + 1e-9;
      const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
      worst = std::max(worst, std::abs(static_cast<double>(above) / xs.size() - survival(d, x)));
    }
    EXPECT_LT(worst, 0.005) << to_string(d);
  }
}

TEST(Distributions, ResidualSampling) {
  Rng rng(17);
  const auto residual_mean = [&](const ServiceDistribution& d, double age) {
    double s = 0;
    for (int i = 0; i < 1'000'000; ++i) s += sample_residual(d, age, rng);
    return s / 1e6;
  };
  EXPECT_NEAR(residual_mean(ServiceDistribution::exponential(1), 5.0), 1.0, 0.01);
  EXPECT_NEAR(residual_mean(ServiceDistribution::shifted_exponential(1, 1), 2.0), 1.0, 0.01);
  EXPECT_NEAR(residual_mean(ServiceDistribution::shifted_exponential(1, 1), 0.5), 1.5, 0.01);
  EXPECT_DOUBLE_EQ(sample_residual(ServiceDistribution::constant(2), 1.5, rng), 0.5);
  // Mixture residual at age 10: components reweighted by survival.
  const double w_slow = 0.2 * std::exp(-1.0);
  const double w_fast = 0.8 * std::exp(-10.0);
  const double expected = (w_slow * 10.0 + w_fast * 1.0) / (w_slow + w_fast);
  EXPECT_NEAR(residual_mean(kMixture, 10.0), expected, 0.01 * expected);
  EXPECT_THROW(sample_residual(ServiceDistribution::uniform(0, 1), 1.0, rng), ConditioningOnNullEvent);
}

// Values below were computed independently (closed forms in exact
// arithmetic) and frozen.
TEST(Distributions, MinOfNFrozenValues) {
  const std::vector<std::pair<unsigned, double>> mixture = {
      {1, 2.8}, {2, 0.8109090909090909}, {3, 0.46019047619047619}, {4, 0.3280395217685541},
      {8, 0.15682468024961986}};
  const std::vector<std::pair<unsigned, double>> weibull = {
      {1, 2.0}, {2, 0.5}, {3, 2.0 / 9.0}, {4, 0.125}, {8, 0.03125}};
  const auto w = ServiceDistribution::weibull(0.5, 1.0);
  for (const auto& [n, v] : mixture) {
    EXPECT_NEAR(min_of_n_mean(kMixture, n, MinMeanMethod::kAnalytic), v, 1e-12 * v) << n;
    EXPECT_NEAR(min_of_n_mean(kMixture, n, MinMeanMethod::kNumericIntegration), v, 1e-8 * v) << n;
    EXPECT_NEAR(min_of_n_mean(kMixture, n, MinMeanMethod::kMonteCarlo, 1), v, 0.02 * v) << n;
  }
  for (const auto& [n, v] : weibull) {
    EXPECT_NEAR(min_of_n_mean(w, n, MinMeanMethod::kAnalytic), v, 1e-12 * v) << n;
    EXPECT_NEAR(min_of_n_mean(w, n, MinMeanMethod::kNumericIntegration), v, 1e-7 * v) << n;
    EXPECT_NEAR(min_of_n_mean(w, n, MinMeanMethod::kMonteCarlo, 2), v, 0.03 * v) << n;
  }
  EXPECT_NEAR(min_of_n_mean(ServiceDistribution::exponential(1), 4, MinMeanMethod::kAnalytic), 0.25, 1e-15);
  EXPECT_NEAR(min_of_n_mean(ServiceDistribution::shifted_exponential(1, 1), 2, MinMeanMethod::kAnalytic), 1.5,
              1e-15);
}

TEST(Distributions, MinOfNRoutesAgree) {
  for (const auto& d : all_variants()) {
    for (unsigned n : {1U, 2U, 3U, 4U, 8U}) {
      const double a = min_of_n_mean(d, n, MinMeanMethod::kAnalytic);
      EXPECT_NEAR(min_of_n_mean(d, n, MinMeanMethod::kNumericIntegration), a, 1e-7 * std::max(1.0, a))
          << to_string(d) << " n=" << n;
    }
  }
}

TEST(Distributions, NumericIntegrationReportsTail) {
  const TailIntegral t = integrate_survival_power(kMixture, 2);
  EXPECT_GT(t.truncated_at, 0.0);
  EXPECT_LE(t.tail_mass_bound, 1e-10);
}

TEST(Classifier, DefaultGridShape) {
  const auto grid = default_classifier_grid(ServiceDistribution::exponential(1));
  EXPECT_EQ(grid.size(), 13U * 14U);
  for (const auto& p : grid) {
    EXPECT_GT(p.a, 0.0);
    EXPECT_GE(p.b, 0.0);
  }
}

TEST(Classifier, ExampleVerdicts) {
  EXPECT_EQ(classify_everywhere(ServiceDistribution::exponential(1)).verdict, EverywhereClass::kBoth);
  EXPECT_EQ(classify_everywhere(kMixture).verdict, EverywhereClass::kHeavyEverywhere);
  EXPECT_EQ(classify_everywhere(ServiceDistribution::weibull(0.5, 1)).verdict, EverywhereClass::kHeavyEverywhere);
  EXPECT_EQ(classify_everywhere(ServiceDistribution::shifted_exponential(1, 1)).verdict,
            EverywhereClass::kLightEverywhere);
  EXPECT_EQ(classify_everywhere(ServiceDistribution::uniform(0, 1)).verdict, EverywhereClass::kLightEverywhere);
  EXPECT_EQ(classify_everywhere(ServiceDistribution::constant(1)).verdict, EverywhereClass::kLightEverywhere);
  EXPECT_EQ(classify_everywhere(ServiceDistribution::two_point(1, 1.5, 0.5)).verdict,
            EverywhereClass::kLightEverywhere);
}

TEST(Classifier, NeitherClass) {
  // Mass at 1 and 3: conditioning on survival past 1 makes 3 certain (heavy
  // behaviour at small a) but a residual of exactly 2 (light at a just below 2).
  const auto d = ServiceDistribution::two_point(1, 3, 0.5);
  const ClassReport rep = classify_everywhere(d);
  EXPECT_EQ(rep.verdict, EverywhereClass::kNeither);
  EXPECT_TRUE(rep.grid_verdict);
  EXPECT_GT(std::abs(rep.worst_violation.lhs - rep.worst_violation.rhs), 0.1);
}

TEST(Classifier, ReportsSkippedPoints) {
  const ClassReport rep = classify_everywhere(ServiceDistribution::uniform(0, 1));
  EXPECT_GT(rep.points_skipped, 0U);
  EXPECT_EQ(rep.points_checked + rep.points_skipped,
            default_classifier_grid(ServiceDistribution::uniform(0, 1)).size());
}

TEST(Classifier, ShiftedSumStaysLight) {
  // shiftexp(1,1) plus const(1) is shiftexp(2,1).
  EXPECT_EQ(classify_everywhere(ServiceDistribution::shifted_exponential(2, 1)).verdict,
            EverywhereClass::kLightEverywhere);
}

// Heavy laws make the min of n at most mean/n; light laws at least; the
// exponential sits exactly on the boundary.
TEST(Classifier, MinOfNAgreesWithClass) {
  for (const auto& d : all_variants()) {
    const auto verdict = classify_everywhere(d).verdict;
    for (unsigned n : {2U, 3U, 4U, 8U}) {
      const double m = min_of_n_mean(d, n, MinMeanMethod::kAnalytic);
      const double bound = mean(d) / n;
      if (verdict == EverywhereClass::kHeavyEverywhere) EXPECT_LE(m, bound + 1e-12) << to_string(d);
      if (verdict == EverywhereClass::kLightEverywhere) EXPECT_GE(m, bound - 1e-12) << to_string(d);
      if (verdict == EverywhereClass::kBoth) EXPECT_NEAR(m, bound, 1e-9) << to_string(d);
    }
  }
}

// Components sorted by rate have pointwise-ordered survival functions.
TEST(Classifier, MixtureComponentsOrdered) {
  const auto& comps = std::get<MixtureExponential>(kMixture.law()).components;
  std::vector<MixtureComponent> sorted = comps;
  std::sort(sorted.begin(), sorted.end(), [](auto& x, auto& y) { return x.rate < y.rate; });
  for (const auto& p : default_classifier_grid(kMixture)) {
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      EXPECT_GE(std::exp(-sorted[i - 1].rate * p.a), std::exp(-sorted[i].rate * p.a));
    }
  }
}

}  // namespace
}  // namespace redq

#include <gtest/gtest.h>

#include "ptlab/stable.hpp"

using namespace ptlab;

namespace {
const LevyStableParams kStandard{1.0, 1.0, 1.0, 0.0};
}

// Reference density and quantiles of the standard index-1, beta=1 law from
// an independent implementation (scipy levy_stable, S1 parametrization).
TEST(Stable, ReferenceDensity) {
  EXPECT_NEAR(stable_pdf(-2.0, kStandard), 0.0065076, 2e-6);
  EXPECT_NEAR(stable_pdf(0.0, kStandard), 0.26224, 2e-5);
  EXPECT_NEAR(stable_pdf(1.0, kStandard), 0.16353, 2e-5);
  EXPECT_NEAR(stable_pdf(5.0, kStandard), 0.026559, 2e-6);
}

TEST(Stable, ReferenceQuantiles) {
  EXPECT_NEAR(stable_quantile(0.10, kStandard), -0.98284, 2e-4);
  EXPECT_NEAR(stable_quantile(0.25, kStandard), -0.41776, 2e-4);
  EXPECT_NEAR(stable_quantile(0.50, kStandard), 0.57563, 2e-4);
  EXPECT_NEAR(stable_quantile(0.75, kStandard), 2.55082, 2e-4);
  EXPECT_NEAR(stable_quantile(0.90, kStandard), 7.12868, 5e-4);
}

TEST(Stable, CharacteristicFunctionInversionAgrees) {
  for (double beta : {1.0, 0.5, -0.7})
    for (double x : {-3.0, -1.0, 0.0, 0.7, 2.0, 6.0}) {
      const LevyStableParams p{1.0, beta, 1.0, 0.0};
      EXPECT_NEAR(stable_pdf(x, p), stable_pdf_charfn(x, p), 1e-7) << beta << " " << x;
    }
}

TEST(Stable, CauchyLimit) {
  const LevyStableParams p{1.0, 0.0, 1.0, 0.0};
  EXPECT_NEAR(stable_pdf(0.0, p), 1.0 / kPi, 1e-15);
  EXPECT_NEAR(stable_pdf_charfn(0.0, p), 1.0 / kPi, 1e-9);
  EXPECT_NEAR(stable_pdf(2.0, p), cauchy_pdf(2.0, 1.0), 1e-15);
}

TEST(Stable, Normalization) {
  const LevyStableParams p{1.0, 1.0, 2.5, -1.0};
  // substitute x = shift + C tan(u) to map the real line onto (-pi/2, pi/2)
  auto f = [&](double u) {
    const double c = std::cos(u);
    return stable_pdf(p.shift + p.C * std::tan(u), p) * p.C / (c * c);
  };
  double total = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double a = -kPi / 2 + k * kPi / 200, b = a + kPi / 200;
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
  }
  EXPECT_NEAR(total, 1.0, 1e-4);
}

TEST(Stable, CdfMatchesDensity) {
  for (double x : {-2.0, 0.0, 1.5, 10.0}) {
    const double h = 1e-4;
    EXPECT_NEAR((stable_cdf(x + h, kStandard) - stable_cdf(x - h, kStandard)) / (2 * h), stable_pdf(x, kStandard), 1e-7);
  }
  EXPECT_NEAR(stable_cdf(-6.0, kStandard), 0.0, 1e-12);
}

TEST(Stable, LeftTailIsDoubleExponential) {
  // log pdf ~ -c exp(-pi x / 2): slope of log(-log pdf) against x is -pi/2.
  const double x1 = -5.0, x2 = -3.5;
  const double y1 = std::log(-stable_log_pdf(x1, kStandard)), y2 = std::log(-stable_log_pdf(x2, kStandard));
  EXPECT_NEAR((y2 - y1) / (x2 - x1), -kPi / 2, 0.05 * kPi / 2);
  EXPECT_TRUE(std::isfinite(stable_log_pdf(-20.0, kStandard)));
}

TEST(Stable, SamplerMatchesCdf) {
  const LevyStableParams p{1.0, 1.0, 1.7, 3.0};
  const auto xs = stable_sample(p, 20000, 5);
  EXPECT_LT(ks_distance(xs, [&](double x) { return stable_cdf(x, p); }), 0.012);
}

TEST(Stable, QuantileFitRecoversParameters) {
  const LevyStableParams p{1.0, 1.0, 6.5, 50.0};
  const auto fit = fit_stable_quantiles(stable_sample(p, 100000, 11));
  EXPECT_NEAR(fit.params.C, 6.5, 0.1);
  EXPECT_NEAR(fit.params.shift, 50.0, 0.15);
}

TEST(Stable, TailSlopeIsMinusOne) {
  const LevyStableParams p{1.0, 1.0, 1.0, 0.0};
  const auto xs = stable_sample(p, 400000, 12);
  const auto fit = fit_stable_quantiles(xs);
  const auto t = ccdf_tail_slope(xs, fit.params.shift);
  EXPECT_GT(t.points, 1000u);
  EXPECT_NEAR(t.slope, -1.0, 0.1);
}

TEST(Stable, InvalidParameters) {
  EXPECT_THROW(stable_pdf(0.0, {1.0, 1.5, 1.0, 0.0}), Error);
  EXPECT_THROW(stable_pdf(0.0, {1.0, 1.0, -1.0, 0.0}), Error);
  EXPECT_THROW(stable_pdf(0.0, {1.5, 1.0, 1.0, 0.0}), Error);
}

TEST(Stable, KsDistanceOfDiscreteSample) {
  // Atoms at 1 and 2 against the uniform law on [0, 2]: the gap just below
  // each atom is 1/2.
  const std::vector<double> xs{1.0, 1.0, 2.0, 2.0};
  EXPECT_NEAR(ks_distance(xs, [](double x) { return std::clamp(x / 2.0, 0.0, 1.0); }), 0.5, 1e-15);
}

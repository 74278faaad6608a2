#include "gpsobol/distributions.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace {

using namespace gpsobol;
using nlohmann::json;

TEST(Uniform, PdfCdfQuantile) {
  const auto d = InputDistribution::uniform(2.0, 5.0);
  EXPECT_DOUBLE_EQ(d.pdf(3.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(d.pdf(1.9), 0.0);
  EXPECT_DOUBLE_EQ(d.pdf(5.1), 0.0);
  EXPECT_DOUBLE_EQ(d.cdf(3.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(d.cdf(1.0), 0.0);
  EXPECT_DOUBLE_EQ(d.cdf(9.0), 1.0);
  EXPECT_DOUBLE_EQ(d.quantile(0.25), 2.75);
  EXPECT_DOUBLE_EQ(d.quantile(0.0), 2.0);
  EXPECT_DOUBLE_EQ(d.quantile(1.0), 5.0);
  EXPECT_EQ(d.lower(), 2.0);
  EXPECT_EQ(d.upper(), 5.0);
}

TEST(Weibull, ReferenceValues) {
  // shape 1.7, scale 2.3, location 0.4; density renormalized on the
  // truncated support.
  const auto d = InputDistribution::weibull(1.7, 2.3, 0.4);
  EXPECT_DOUBLE_EQ(d.pdf(0.4), 0.0);
  EXPECT_NEAR(d.pdf(1.0), 0.2606086229286757, 1e-13);
  EXPECT_NEAR(d.pdf(2.0), 0.33423593516566436, 1e-13);
  EXPECT_NEAR(d.pdf(5.0), 0.046603136609222641, 1e-13);
  EXPECT_DOUBLE_EQ(d.cdf(0.4), 0.0);
  EXPECT_NEAR(d.cdf(1.0), 0.096826251467815011, 1e-13);
  EXPECT_NEAR(d.cdf(2.0), 0.41701476871077359, 1e-13);
  EXPECT_NEAR(d.cdf(5.0), 0.96118737060516846, 1e-13);
  EXPECT_NEAR(d.quantile(0.05), 0.80081129319562083, 1e-12);
  EXPECT_NEAR(d.quantile(0.5), 2.2539403395260442, 1e-12);
  EXPECT_NEAR(d.quantile(0.95), 4.7855464706874011, 1e-12);
  EXPECT_NEAR(d.quantile(1.0), 16.603490931381543, 1e-8);
  EXPECT_DOUBLE_EQ(d.quantile(0.0), 0.4);
  EXPECT_DOUBLE_EQ(d.upper(), d.quantile(1.0));
}

TEST(Trapezoidal, ReferenceValues) {
  const auto d = InputDistribution::trapezoidal(0.0, 1.0, 3.0, 5.0);
  const double h = 0.2857142857142857;  // 2 / ((d - a) + (c - b))
  EXPECT_NEAR(d.pdf(0.5), 0.5 * h, 1e-16);
  EXPECT_NEAR(d.pdf(2.0), h, 1e-16);
  EXPECT_NEAR(d.pdf(4.0), 0.5 * h, 1e-16);
  EXPECT_DOUBLE_EQ(d.pdf(-0.1), 0.0);
  EXPECT_DOUBLE_EQ(d.pdf(5.1), 0.0);
  EXPECT_NEAR(d.cdf(0.5), 0.035714285714285712, 1e-16);
  EXPECT_NEAR(d.cdf(2.0), 0.42857142857142855, 1e-15);
  EXPECT_NEAR(d.cdf(4.0), 0.9285714285714286, 1e-15);
  EXPECT_NEAR(d.quantile(0.07), 0.7, 1e-13);
  EXPECT_NEAR(d.quantile(0.5), 2.25, 1e-13);
  EXPECT_NEAR(d.quantile(0.9), 3.8167840433800766, 1e-13);
}

TEST(Trapezoidal, DegenerateRampsAllowed) {
  // No left ramp: density jumps at a.
  const auto d = InputDistribution::trapezoidal(0.0, 0.0, 1.0, 2.0);
  const double h = 2.0 / (2.0 + 1.0);
  EXPECT_NEAR(d.pdf(0.0), h, 1e-15);
  EXPECT_NEAR(d.pdf(0.5), h, 1e-15);
  EXPECT_DOUBLE_EQ(d.quantile(0.0), 0.0);
  EXPECT_DOUBLE_EQ(d.quantile(1.0), 2.0);
  for (double u : {0.1, 0.4, 0.8, 0.99}) EXPECT_NEAR(d.cdf(d.quantile(u)), u, 1e-12);
  // Triangle: plateau collapses to a point.
  const auto t = InputDistribution::trapezoidal(-1.0, 0.0, 0.0, 1.0);
  EXPECT_NEAR(t.pdf(0.0), 1.0, 1e-15);
  EXPECT_NEAR(t.cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(t.quantile(0.5), 0.0, 1e-12);
}

TEST(Distributions, QuantileCdfRoundTrip) {
  const InputDistribution dists[] = {InputDistribution::uniform(-2.0, 7.0),
                                     InputDistribution::weibull(0.8, 1.5),
                                     InputDistribution::weibull(2.4, 0.7, -1.0),
                                     InputDistribution::trapezoidal(0.0, 1.0, 3.0, 5.0)};
  for (const auto& d : dists) {
    for (int k = 1; k < 200; ++k) {
      const double u = k / 200.0;
      EXPECT_NEAR(d.cdf(d.quantile(u)), u, 1e-10);
    }
    // Quantile is monotone.
    double prev = d.quantile(0.0);
    for (int k = 1; k <= 100; ++k) {
      const double x = d.quantile(k / 100.0);
      EXPECT_GE(x, prev);
      prev = x;
    }
  }
}

TEST(Distributions, DensityIntegratesToOne) {
  const InputDistribution dists[] = {InputDistribution::uniform(-2.0, 7.0),
                                     InputDistribution::weibull(1.7, 2.3, 0.4),
                                     InputDistribution::trapezoidal(0.0, 0.0, 1.0, 2.0)};
  for (const auto& d : dists) {
    // weighted_rule normalizes; integrate the raw density with the panels.
    const oracle::WeightedRule rule = oracle::weighted_rule(d);
    double mass = 0.0;
    for (double w : rule.w) mass += w;
    EXPECT_NEAR(mass, 1.0, 1e-12);
    // Mean under the rule matches the analytic mean where known.
    if (d.kind() == InputDistribution::Kind::uniform) {
      EXPECT_NEAR(oracle::integrate(rule, [](double x) { return x; }), 2.5, 1e-10);
    }
  }
}

TEST(Distributions, ConstructionErrors) {
  EXPECT_THROW(InputDistribution::uniform(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::uniform(2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::weibull(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::weibull(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::weibull(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::trapezoidal(1.0, 0.0, 2.0, 3.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::trapezoidal(0.0, 2.0, 1.0, 3.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::trapezoidal(0.0, 1.0, 3.0, 2.0), std::invalid_argument);
  EXPECT_THROW(InputDistribution::trapezoidal(0.0, 0.0, 0.0, 0.0), std::invalid_argument);
  // The same bad values via a config document surface as config errors.
  EXPECT_THROW(InputDistribution::from_json(
                   nlohmann::json{{"kind", "uniform"}, {"a", 2.0}, {"b", 1.0}}),
               ConfigError);
}

TEST(Distributions, JsonRoundTrip) {
  const InputDistribution dists[] = {InputDistribution::uniform(-2.0, 7.0),
                                     InputDistribution::weibull(1.7, 2.3, 0.4),
                                     InputDistribution::trapezoidal(0.0, 1.0, 3.0, 5.0)};
  for (const auto& d : dists) {
    const auto back = InputDistribution::from_json(d.to_json());
    EXPECT_EQ(back.kind(), d.kind());
    EXPECT_EQ(back.parameters(), d.parameters());
  }
}

TEST(Distributions, JsonSchemaStrict) {
  EXPECT_THROW(InputDistribution::from_json(json{{"kind", "uniform"}, {"a", 0.0}}), ConfigError);
  EXPECT_THROW(
      InputDistribution::from_json(json{{"kind", "uniform"}, {"a", 0.0}, {"b", 1.0}, {"c", 2.0}}),
      ConfigError);
  EXPECT_THROW(InputDistribution::from_json(json{{"kind", "gaussian"}, {"a", 0.0}, {"b", 1.0}}),
               ConfigError);
  EXPECT_THROW(InputDistribution::from_json(json::array()), ConfigError);
  // Weibull location is optional and defaults to zero.
  const auto w = InputDistribution::from_json(json{{"kind", "weibull"}, {"shape", 2.0},
                                                   {"scale", 1.0}});
  EXPECT_EQ(w.parameters()[2], 0.0);
}

TEST(InputSpace, BasicAccessors) {
  const InputSpace space({InputDistribution::uniform(0.0, 1.0),
                          InputDistribution::trapezoidal(0.0, 1.0, 3.0, 5.0)});
  EXPECT_EQ(space.dim(), 2);
  EXPECT_EQ(space.lower()(1), 0.0);
  EXPECT_EQ(space.upper()(1), 5.0);
  Eigen::VectorXd x(2);
  x << 0.5, 2.0;
  EXPECT_TRUE(space.contains(x));
  x << 1.5, 2.0;
  EXPECT_FALSE(space.contains(x));
  Eigen::VectorXd u(2);
  u << 0.5, 0.5;
  const Eigen::VectorXd q = space.quantile(u);
  EXPECT_DOUBLE_EQ(q(0), 0.5);
  EXPECT_NEAR(q(1), 2.25, 1e-13);
  EXPECT_THROW(space.quantile(Eigen::VectorXd::Ones(3)), std::invalid_argument);
  EXPECT_THROW(InputSpace(std::vector<InputDistribution>{}), std::invalid_argument);
}

TEST(InputSpace, JsonRoundTripAndErrors) {
  const InputSpace space({InputDistribution::weibull(1.5, 2.0),
                          InputDistribution::uniform(-1.0, 1.0)});
  const auto back = InputSpace::from_json(space.to_json());
  EXPECT_EQ(back.dim(), 2);
  EXPECT_EQ(back.marginal(0).kind(), InputDistribution::Kind::weibull);
  EXPECT_THROW(InputSpace::from_json(json::array()), ConfigError);
  EXPECT_THROW(InputSpace::from_json(json{{"kind", "uniform"}}), ConfigError);
}

TEST(ProbabilityRule, MatchesAnalyticMoments) {
  const auto uniform = InputDistribution::uniform(1.0, 4.0);
  const QuadratureRule ru = probability_rule(uniform, 16);
  EXPECT_NEAR(ru.weights.sum(), 1.0, 1e-14);
  EXPECT_NEAR(integrate(ru, [](double x) { return x; }), 2.5, 1e-12);
  EXPECT_NEAR(integrate(ru, [](double x) { return x * x; }), 7.0, 1e-12);  // E[X^2] on U(1,4)

  const auto weib = InputDistribution::weibull(1.7, 2.3, 0.4);
  const QuadratureRule rw = probability_rule(weib, 512);
  const oracle::WeightedRule ow = oracle::weighted_rule(weib);
  EXPECT_NEAR(rw.weights.sum(), 1.0, 1e-14);
  EXPECT_NEAR(integrate(rw, [](double x) { return x; }),
              oracle::integrate(ow, [](double x) { return x; }), 1e-9);
  EXPECT_NEAR(integrate(rw, [](double x) { return std::sin(x); }),
              oracle::integrate(ow, [](double x) { return std::sin(x); }), 1e-9);

  const auto trap = InputDistribution::trapezoidal(0.0, 1.0, 3.0, 5.0);
  const QuadratureRule rt = probability_rule(trap, 512);
  const oracle::WeightedRule ot = oracle::weighted_rule(trap);
  EXPECT_NEAR(integrate(rt, [](double x) { return x * x; }),
              oracle::integrate(ot, [](double x) { return x * x; }), 1e-9);
}

}  // namespace

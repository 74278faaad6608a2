#include "gpsobol/fit.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "gpsobol/design.hpp"

namespace {

using namespace gpsobol;

InputSpace unit_square() {
  return InputSpace({InputDistribution::uniform(0.0, 1.0), InputDistribution::uniform(0.0, 1.0)});
}

Design smooth_design(Eigen::Index n, std::uint64_t seed) {
  Design d = lhs_sample(unit_square(), n, seed);
  d.responses.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d.responses(i) = std::sin(4.0 * d.points(i, 0)) + d.points(i, 1) * d.points(i, 1);
  return d;
}

TEST(ProfileLikelihood, FiniteForReasonableParameters) {
  const Design d = smooth_design(15, 4);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(2, 3.0);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 2.0);
  const auto ll = profile_log_likelihood(d, TrendKind::linear, theta, p, 1e-8);
  ASSERT_TRUE(ll.has_value());
  EXPECT_TRUE(std::isfinite(*ll));
}

TEST(ProfileLikelihood, EmptyOnSingularCorrelation) {
  Design d = smooth_design(10, 4);
  d.points.row(1) = d.points.row(0);  // duplicate point, zero theta, no nugget
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 2.0);
  EXPECT_FALSE(profile_log_likelihood(d, TrendKind::constant, theta, p, 0.0).has_value());
}

TEST(FitGp, FixedThetaBypassesSearch) {
  const Design d = smooth_design(15, 9);
  FitOptions options;
  Eigen::VectorXd theta(2);
  theta << 5.0, 1.5;
  options.fixed_theta = theta;
  const FittedGp gp = fit_gp(d, unit_square(), TrendKind::linear, options);
  EXPECT_TRUE(gp.params().theta.cwiseEqual(theta).all());
  EXPECT_DOUBLE_EQ(gp.params().p(0), 2.0);
  EXPECT_EQ(gp.trace(), nullptr);
}

TEST(FitGp, SearchBeatsArbitraryParameters) {
  const Design d = smooth_design(20, 5);
  FitOptions options;
  options.multistarts = 3;
  options.seed = 11;
  const FittedGp fitted = fit_gp(d, unit_square(), TrendKind::linear, options);

  FitOptions fixed;
  fixed.fixed_theta = Eigen::VectorXd::Constant(2, 40.0);
  const FittedGp arbitrary = fit_gp(d, unit_square(), TrendKind::linear, fixed);
  EXPECT_GE(fitted.log_likelihood(), arbitrary.log_likelihood());
}

TEST(FitGp, DeterministicForEqualSeeds) {
  const Design d = smooth_design(15, 2);
  FitOptions options;
  options.multistarts = 2;
  options.seed = 123;
  const FittedGp a = fit_gp(d, unit_square(), TrendKind::linear, options);
  const FittedGp b = fit_gp(d, unit_square(), TrendKind::linear, options);
  EXPECT_TRUE(a.params().theta.cwiseEqual(b.params().theta).all());
  EXPECT_EQ(a.log_likelihood(), b.log_likelihood());
}

TEST(FitGp, TraceRecordsAllStarts) {
  const Design d = smooth_design(15, 6);
  FitOptions options;
  options.multistarts = 3;
  options.max_evaluations = 300;
  const FittedGp gp = fit_gp(d, unit_square(), TrendKind::linear, options);
  ASSERT_NE(gp.trace(), nullptr);
  EXPECT_EQ(gp.trace()->starts.size(), 3u);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& start : gp.trace()->starts) {
    EXPECT_LE(start.evaluations, 300);
    best = std::max(best, start.loglik);
  }
  EXPECT_DOUBLE_EQ(best, gp.trace()->best_loglik);
  EXPECT_DOUBLE_EQ(best, gp.trace()->starts[static_cast<std::size_t>(gp.trace()->best_start)]
                             .loglik);
  // The conditioned model evaluates the same likelihood the search reported.
  EXPECT_NEAR(gp.log_likelihood(), best, 1e-9 * std::abs(best));
}

TEST(FitGp, EstimatedExponentsStayInRange) {
  const Design d = smooth_design(18, 13);
  FitOptions options;
  options.estimate_p = true;
  options.multistarts = 2;
  options.max_evaluations = 400;
  const FittedGp gp = fit_gp(d, unit_square(), TrendKind::linear, options);
  for (Eigen::Index l = 0; l < 2; ++l) {
    EXPECT_GE(gp.params().p(l), 0.5);
    EXPECT_LE(gp.params().p(l), 2.0);
  }
}

TEST(FitGp, PredictsWellOnSmoothData) {
  const Design d = smooth_design(40, 3);
  FitOptions options;
  options.multistarts = 3;
  const FittedGp gp = fit_gp(d, unit_square(), TrendKind::linear, options);
  Design test;
  test.points = sample_iid(unit_square(), 1000, 31);
  test.responses.resize(1000);
  for (Eigen::Index i = 0; i < 1000; ++i)
    test.responses(i) =
        std::sin(4.0 * test.points(i, 0)) + test.points(i, 1) * test.points(i, 1);
  EXPECT_GT(q2_score(gp, test).q2, 0.95);
}

TEST(FitGp, InputValidation) {
  const Design d = smooth_design(15, 1);
  const InputSpace space = unit_square();

  Design no_y = d;
  no_y.responses.resize(0);
  EXPECT_THROW(fit_gp(no_y, space, TrendKind::linear, {}), std::invalid_argument);

  Design constant = d;
  constant.responses.setConstant(2.0);
  EXPECT_THROW(fit_gp(constant, space, TrendKind::linear, {}), std::invalid_argument);

  Design outside = d;
  outside.points(0, 0) = 2.0;
  EXPECT_THROW(fit_gp(outside, space, TrendKind::linear, {}), std::invalid_argument);

  const InputSpace wrong_dim({InputDistribution::uniform(0.0, 1.0)});
  EXPECT_THROW(fit_gp(d, wrong_dim, TrendKind::linear, {}), std::invalid_argument);

  FitOptions bad;
  bad.multistarts = 0;
  EXPECT_THROW(fit_gp(d, space, TrendKind::linear, bad), std::invalid_argument);
  bad.multistarts = 1;
  bad.nugget = 1.5;
  EXPECT_THROW(fit_gp(d, space, TrendKind::linear, bad), std::invalid_argument);
  bad.nugget = 1e-8;
  bad.p_exponent = 2.5;
  EXPECT_THROW(fit_gp(d, space, TrendKind::linear, bad), std::invalid_argument);
}

TEST(PatternSearch, FindsQuadraticMinimum) {
  const auto f = [](const Eigen::VectorXd& x) {
    return (x(0) - 0.3) * (x(0) - 0.3) + 2.0 * (x(1) - 0.7) * (x(1) - 0.7);
  };
  const auto run = detail::hooke_jeeves(f, Eigen::VectorXd::Constant(2, 0.5), 0.25, 1e-6, 2000);
  EXPECT_NEAR(run.x(0), 0.3, 1e-4);
  EXPECT_NEAR(run.x(1), 0.7, 1e-4);
  EXPECT_LE(run.evaluations, 2000);
}

TEST(PatternSearch, RespectsBoxAndBudget) {
  const auto f = [](const Eigen::VectorXd& x) { return -x.sum(); };  // pushes to the corner
  const auto run = detail::hooke_jeeves(f, Eigen::VectorXd::Constant(3, 0.1), 0.25, 1e-5, 60);
  EXPECT_LE(run.evaluations, 60);
  for (Eigen::Index l = 0; l < 3; ++l) {
    EXPECT_GE(run.x(l), 0.0);
    EXPECT_LE(run.x(l), 1.0);
  }
}

}  // namespace

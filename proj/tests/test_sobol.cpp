#include "gpsobol/sobol.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "gpsobol/design.hpp"
#include "gpsobol/distributions.hpp"
#include "gpsobol/gp.hpp"
#include "gpsobol/kernel_integrals.hpp"
#include "gpsobol/main_effect.hpp"
#include "support/oracles.hpp"

namespace {

using namespace gpsobol;

Design design_from(const InputSpace& space, Eigen::Index n, std::uint64_t seed,
                   const std::function<double(const Eigen::VectorXd&)>& f) {
  Design design = lhs_sample(space, n, seed);
  design.responses.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    design.responses(i) = f(design.points.row(i).transpose());
  return design;
}

// Two-input model whose conditional mean is exactly x1: the linear trend
// absorbs the data and leaves zero residuals.
TEST(SobolPredictor, ExactForLinearResponse) {
  std::vector<InputDistribution> marginals;
  marginals.push_back(InputDistribution::uniform(-1.0, 2.0));
  marginals.push_back(InputDistribution::uniform(0.5, 4.0));
  const InputSpace space(std::move(marginals));

  const Design design = design_from(space, 12, 5u,
                                    [](const Eigen::VectorXd& x) { return x(0); });
  Eigen::VectorXd theta(2), p(2);
  theta << 0.7, 0.4;
  p << 2.0, 2.0;
  const FittedGp gp(design, TrendKind::linear, theta, p, 1e-8, 1.0);

  const KernelIntegralTable table = build_table(gp, space, 512);
  const std::vector<SobolEstimate> s = sobol_predictor(gp, table);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].input_index, 1);
  EXPECT_EQ(s[1].input_index, 2);
  EXPECT_EQ(s[0].approach, SobolApproach::predictor_only);
  EXPECT_NEAR(s[0].value, 1.0, 1e-6);
  EXPECT_NEAR(s[1].value, 0.0, 1e-6);
  EXPECT_FALSE(s[0].std_dev.has_value());
  EXPECT_FALSE(s[0].ci.has_value());
}

struct CaseModel {
  InputSpace space;
  FittedGp gp;
  std::vector<oracle::WeightedRule> rules;
};

CaseModel case_d2() {
  std::vector<InputDistribution> marginals;
  marginals.push_back(InputDistribution::uniform(-1.0, 2.0));
  marginals.push_back(InputDistribution::trapezoidal(0.0, 1.0, 3.0, 5.0));
  InputSpace space(std::move(marginals));

  const auto f = [](const Eigen::VectorXd& x) {
    return std::sin(x(0)) + 0.5 * x(0) * x(1) + 0.2 * x(1) * x(1);
  };
  const Design design = design_from(space, 14, 11u, f);
  Eigen::VectorXd theta(2), p(2);
  theta << 0.9, 0.25;
  p << 2.0, 2.0;
  FittedGp gp(design, TrendKind::linear, theta, p);

  std::vector<oracle::WeightedRule> rules;
  rules.push_back(oracle::weighted_rule(space.marginal(0), 48));
  rules.push_back(oracle::weighted_rule(space.marginal(1), 48));
  return CaseModel{std::move(space), std::move(gp), std::move(rules)};
}

CaseModel case_d3() {
  std::vector<InputDistribution> marginals;
  marginals.push_back(InputDistribution::uniform(-1.0, 2.0));
  marginals.push_back(InputDistribution::weibull(1.7, 2.3, 0.4));
  marginals.push_back(InputDistribution::trapezoidal(-2.0, -1.0, 1.0, 2.0));
  InputSpace space(std::move(marginals));

  const auto f = [](const Eigen::VectorXd& x) {
    return x(0) * x(1) + std::sin(x(2)) + 0.1 * x(0) * x(0);
  };
  const Design design = design_from(space, 16, 23u, f);
  Eigen::VectorXd theta(3), p(3);
  theta << 0.8, 0.3, 0.5;
  p << 2.0, 2.0, 2.0;
  FittedGp gp(design, TrendKind::constant, theta, p);

  std::vector<oracle::WeightedRule> rules;
  rules.push_back(oracle::weighted_rule(space.marginal(0), 8));
  rules.push_back(oracle::weighted_rule(space.marginal(1), 16));
  rules.push_back(oracle::weighted_rule(space.marginal(2), 9));
  return CaseModel{std::move(space), std::move(gp), std::move(rules)};
}

void compare_against_oracles(const CaseModel& model, double tol) {
  const KernelIntegralTable table = build_table(model.gp, model.space, 2048);
  const SobolDecomposition dec = decompose(model.gp, table);

  const oracle::NaiveGp naive = oracle::naive_from(model.gp);
  const auto mean_fn = [&](const Eigen::VectorXd& x) { return naive.mean(x); };
  const oracle::PredictorDecomposition brute =
      oracle::brute_force_decomposition(mean_fn, model.rules);
  const oracle::GlobalCorrections corr = oracle::global_corrections(naive, model.rules);

  const auto near = [tol](double a, double b) {
    EXPECT_NEAR(a, b, tol * std::max(1.0, std::abs(b)));
  };
  near(dec.predictor.total_variance, brute.total);
  near(dec.global.total_variance - dec.predictor.total_variance, corr.denominator_extra);
  for (Eigen::Index i = 0; i < model.gp.dim(); ++i) {
    near(dec.predictor.numerators(i), brute.numerators(i));
    near(dec.global.numerators(i) - dec.predictor.numerators(i), corr.numerator_extra(i));
  }

  // The expected conditional covariance only adds variance.
  EXPECT_GE(dec.global.total_variance, dec.predictor.total_variance - 1e-12);
  // First-order pieces never exceed the total.
  const double slack = 1e-9 * std::max(1.0, dec.global.total_variance);
  EXPECT_LE(dec.predictor.numerators.sum(), dec.predictor.total_variance + slack);
  EXPECT_LE(dec.global.numerators.sum(), dec.global.total_variance + slack);
}

TEST(SobolDecomposition, MatchesOraclesOnTwoInputs) { compare_against_oracles(case_d2(), 1e-7); }

TEST(SobolDecomposition, MatchesOraclesOnThreeInputs) { compare_against_oracles(case_d3(), 1e-6); }

TEST(SobolEstimates, RatiosComeFromTheDecomposition) {
  const CaseModel model = case_d2();
  const KernelIntegralTable table = build_table(model.gp, model.space, 1024);
  const SobolDecomposition dec = decompose(model.gp, table);

  const std::vector<SobolEstimate> pred = sobol_predictor(model.gp, table);
  const std::vector<SobolEstimate> glob = sobol_global_mean(model.gp, table);
  ASSERT_EQ(pred.size(), 2u);
  ASSERT_EQ(glob.size(), 2u);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(pred[static_cast<std::size_t>(i)].value,
                dec.predictor.numerators(i) / dec.predictor.total_variance, 1e-12);
    EXPECT_NEAR(glob[static_cast<std::size_t>(i)].value,
                dec.global.numerators(i) / dec.global.total_variance, 1e-12);
    EXPECT_EQ(glob[static_cast<std::size_t>(i)].approach, SobolApproach::global_model);
    EXPECT_GE(pred[static_cast<std::size_t>(i)].value, 0.0);
    EXPECT_LE(pred[static_cast<std::size_t>(i)].value, 1.0);
  }
}

TEST(SobolEstimates, GridMeanTracksAnalyticMean) {
  const CaseModel model = case_d2();
  const KernelIntegralTable table = build_table(model.gp, model.space, 1024);
  const std::vector<SobolEstimate> glob = sobol_global_mean(model.gp, table);

  std::vector<MainEffectProcess> effects;
  for (int i = 1; i <= 2; ++i)
    effects.push_back(build_main_effect(model.gp, model.space, table, i, 200));
  const std::vector<SobolEstimate> with_std = sobol_global_std(model.gp, table, effects);
  ASSERT_EQ(with_std.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    // The grid mean is a discretization of the analytic one.
    EXPECT_NEAR(with_std[i].value, glob[i].value, 0.02);
    ASSERT_TRUE(with_std[i].std_dev.has_value());
    EXPECT_GE(*with_std[i].std_dev, 0.0);
    EXPECT_LT(*with_std[i].std_dev, 1.0);
  }

  std::vector<MainEffectProcess> reversed(effects.rbegin(), effects.rend());
  EXPECT_THROW(sobol_global_std(model.gp, table, reversed), std::invalid_argument);
  effects.pop_back();
  EXPECT_THROW(sobol_global_std(model.gp, table, effects), std::invalid_argument);
}

TEST(SobolEstimates, TableMustMatchModel) {
  const CaseModel model = case_d2();
  // A table built from a different design size does not pass validation.
  const Design other = design_from(model.space, 9, 77u, [](const Eigen::VectorXd& x) {
    return x(0) + x(1);
  });
  Eigen::VectorXd theta(2), p(2);
  theta << 0.9, 0.25;
  p << 2.0, 2.0;
  const FittedGp other_gp(other, TrendKind::constant, theta, p);
  const KernelIntegralTable wrong = build_table(other_gp, model.space, 64);
  EXPECT_THROW(decompose(model.gp, wrong), std::invalid_argument);
  EXPECT_THROW(sobol_predictor(model.gp, wrong), std::invalid_argument);
  EXPECT_THROW(sobol_global_mean(model.gp, wrong), std::invalid_argument);
}

TEST(FinalizeIndex, ClampsRoundoffRejectsRest) {
  EXPECT_DOUBLE_EQ(detail::finalize_index(-1e-9, 1.0, 0, "test"), 0.0);
  EXPECT_DOUBLE_EQ(detail::finalize_index(-1e-4, 1.0, 0, "test"), 0.0);
  EXPECT_DOUBLE_EQ(detail::finalize_index(1.0 + 1e-9, 1.0, 0, "test"), 1.0);
  EXPECT_DOUBLE_EQ(detail::finalize_index(0.3, 1.0, 0, "test"), 0.3);
  EXPECT_THROW(detail::finalize_index(-2e-3, 1.0, 0, "test"), std::runtime_error);
  EXPECT_THROW(detail::finalize_index(1.1, 1.0, 0, "test"), std::runtime_error);
}

TEST(CheckTotalVariance, RejectsDegenerateTotals) {
  EXPECT_NO_THROW(detail::check_total_variance(1.0, 1.0, "test"));
  EXPECT_THROW(detail::check_total_variance(0.0, 1.0, "test"), std::runtime_error);
  EXPECT_THROW(detail::check_total_variance(1e-20, 1.0, "test"), std::runtime_error);
}

TEST(L2Error, SumsSquaredDeviations) {
  std::vector<SobolEstimate> estimates(2);
  estimates[0].value = 0.9;
  estimates[1].value = 0.1;
  Eigen::VectorXd truth(2);
  truth << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(l2_error(estimates, truth), 0.02);

  Eigen::VectorXd wrong(3);
  wrong << 1.0, 0.0, 0.0;
  EXPECT_THROW(l2_error(estimates, wrong), std::invalid_argument);
}

}  // namespace

#include "gpsobol/quadrature.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace {

using namespace gpsobol;

TEST(GaussLegendre, ThreePointReference) {
  const QuadratureRule& r = gauss_legendre_01(3);
  ASSERT_EQ(r.nodes.size(), 3);
  EXPECT_NEAR(r.nodes(0), 0.1127016653792583, 1e-15);
  EXPECT_NEAR(r.nodes(1), 0.5, 1e-15);
  EXPECT_NEAR(r.nodes(2), 0.8872983346207417, 1e-15);
  EXPECT_NEAR(r.weights(0), 0.27777777777777785, 1e-15);
  EXPECT_NEAR(r.weights(1), 0.44444444444444442, 1e-15);
  EXPECT_NEAR(r.weights(2), 0.27777777777777785, 1e-15);
}

TEST(GaussLegendre, FivePointReference) {
  const QuadratureRule& r = gauss_legendre_01(5);
  ASSERT_EQ(r.nodes.size(), 5);
  EXPECT_NEAR(r.nodes(0), 0.046910077030668018, 1e-15);
  EXPECT_NEAR(r.nodes(3), 0.7692346550528415, 1e-15);
  EXPECT_NEAR(r.weights(0), 0.11846344252809471, 1e-15);
  EXPECT_NEAR(r.weights(2), 0.2844444444444445, 1e-15);
}

TEST(GaussLegendre, PolynomialExactness) {
  for (int m = 1; m <= 10; ++m) {
    const QuadratureRule& r = gauss_legendre_01(m);
    for (int k = 0; k <= 2 * m - 1; ++k) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < r.nodes.size(); ++i)
        acc += r.weights(i) * std::pow(r.nodes(i), k);
      EXPECT_NEAR(acc, 1.0 / (k + 1), 1e-14) << "m=" << m << " k=" << k;
    }
  }
}

TEST(GaussLegendre, NodesAscendingWeightsPositive) {
  for (int m : {1, 2, 7, 33, 128}) {
    const QuadratureRule& r = gauss_legendre_01(m);
    ASSERT_EQ(r.nodes.size(), m);
    double wsum = 0.0;
    for (Eigen::Index i = 0; i < r.nodes.size(); ++i) {
      EXPECT_GT(r.nodes(i), 0.0);
      EXPECT_LT(r.nodes(i), 1.0);
      EXPECT_GT(r.weights(i), 0.0);
      if (i > 0) {
        EXPECT_GT(r.nodes(i), r.nodes(i - 1));
      }
      wsum += r.weights(i);
    }
    EXPECT_NEAR(wsum, 1.0, 1e-14);
  }
}

TEST(GaussLegendre, MappedInterval) {
  const QuadratureRule r = gauss_legendre_on(2.0, 5.0, 6);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.nodes.size(); ++i) acc += r.weights(i) * r.nodes(i) * r.nodes(i);
  EXPECT_NEAR(acc, 39.0, 1e-12);  // integral of x^2 over [2, 5]
}

TEST(GaussLegendre, IntegrateHelper) {
  const QuadratureRule& r = gauss_legendre_01(20);
  EXPECT_NEAR(integrate(r, [](double x) { return std::sin(x); }), 1.0 - std::cos(1.0), 1e-15);
}

TEST(GaussLegendre, RejectsBadOrder) {
  EXPECT_THROW(gauss_legendre_01(0), std::invalid_argument);
  EXPECT_THROW(gauss_legendre_01(-3), std::invalid_argument);
}

}  // namespace

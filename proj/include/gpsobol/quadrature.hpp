#pragma once

// Gauss-Legendre nodes and weights, rescaled to [0, 1].  Rules are computed
// once per order by Newton iteration on the Legendre polynomial and cached.

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace gpsobol {

struct QuadratureRule {
  Eigen::VectorXd nodes;    // ascending
  Eigen::VectorXd weights;  // positive, summing to the interval length
};

namespace detail {

inline QuadratureRule compute_gauss_legendre_01(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre_01: order must be positive");
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  // P_m and its derivative by the three-term recurrence.
  const auto legendre = [m](double t) {
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    const double dp = static_cast<double>(m) * (t * p1 - p0) / (t * t - 1.0);
    return std::pair<double, double>{p1, dp};
  };
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess for the i-th root of P_m on [-1, 1].
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // Weight from the derivative at the converged root, not a stale iterate.
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = 0.5 * (1.0 - x);  // roots found in descending x; mirror to ascending
    rule.weights(i) = 0.5 * w;
    rule.nodes(m - 1 - i) = 0.5 * (1.0 + x);
    rule.weights(m - 1 - i) = 0.5 * w;
  }
  return rule;
}

}  // namespace detail

// Rule of the given order on [0, 1]; weights sum to 1.
inline const QuadratureRule& gauss_legendre_01(int m) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, detail::compute_gauss_legendre_01(m)).first;
  return it->second;
}

// Rule mapped onto [a, b]; weights sum to b - a.
inline QuadratureRule gauss_legendre_on(double a, double b, int m) {
  if (!(b > a)) throw std::invalid_argument("gauss_legendre_on: empty interval");
  const QuadratureRule& base = gauss_legendre_01(m);
  QuadratureRule rule;
  rule.nodes = a + (b - a) * base.nodes.array();
  rule.weights = (b - a) * base.weights;
  return rule;
}

template <typename F>
double integrate(const QuadratureRule& rule, F&& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) acc += rule.weights(i) * f(rule.nodes(i));
  return acc;
}

}  // namespace gpsobol

#pragma once

// Closed-form first-order sensitivity indices of the fitted model.
//
// Approach 1 treats the conditional mean m(x) as a deterministic function:
//   S_i = Var_{X_i} E_{X_{-i}}[m(X) | X_i] / Var_X[m(X)].
// Approach 2 applies the variance decomposition to the full conditional
// process; the randomness is kept in the numerator only, so the point
// estimate is mu_i = E Var_{X_i}[A_i] / E Var_X[Y] and the spread of the
// randomized index comes from the main-effect grid moments.
//
// Every term reduces to kernel-integral primitives: with
//   b_i(j) = prod_{m != i} u1[m](j),        u_all(j) = prod_m u1[m](j),
//   a_i = u2[i] - u1[i] u1[i]^T,            pu2 = prod_m u2[m],
// the numerator of approach 1 for input i is
//   beta_i^2 var_i + 2 beta_i sum_j gamma_j b_i(j) (t1[i](j) - mean1_i u1[i](j))
//     + (gamma . b_i)^T a_i (gamma . b_i),
// its denominator is the same construction over all dimensions jointly, and
// approach 2 adds the expected conditional covariance terms
//   sigma2 [ prod_{m != i} w2[m] (1 - w2[i]) - b_i^T (K^{-1} . a_i) b_i ]
// to the numerator and sigma2 [ 1 - prod w2 - <K^{-1}, pu2 - u_all u_all^T> ]
// to the denominator (elementwise products written ".").

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsobol/common.hpp"
#include "gpsobol/gp.hpp"
#include "gpsobol/kernel_integrals.hpp"
#include "gpsobol/main_effect.hpp"

namespace gpsobol {

enum class SobolApproach { predictor_only, global_model };

inline const char* approach_name(SobolApproach a) {
  return a == SobolApproach::predictor_only ? "predictor_only" : "global_model";
}

struct SobolEstimate {
  int input_index = 0;  // one-based
  SobolApproach approach = SobolApproach::predictor_only;
  double value = 0.0;
  std::optional<double> std_dev;          // sigma of the randomized index
  std::optional<ConfidenceInterval> ci;   // of the randomized index
};

struct VarianceDecomposition {
  double total_variance = 0.0;
  Eigen::VectorXd numerators;  // one per input
};

// Both approaches' numerators and denominators.
struct SobolDecomposition {
  VarianceDecomposition predictor;
  VarianceDecomposition global;
};

inline SobolDecomposition decompose(const FittedGp& gp, const KernelIntegralTable& table) {
  const Eigen::Index d = gp.dim(), n = gp.size();
  if (table.dim() != d || table.design_size() != n)
    throw std::invalid_argument("decompose: table does not match the model");

  const Eigen::VectorXd& gamma = gp.gamma();
  const double sigma2 = gp.params().sigma2;
  const bool linear = gp.trend().kind() == TrendKind::linear;

  Eigen::VectorXd u_all = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Ones(d, n);  // b(i, j) = prod_{m != i} u1(m, j)
  for (Eigen::Index m = 0; m < d; ++m) {
    u_all = u_all.cwiseProduct(table.u1.row(m).transpose());
    for (Eigen::Index i = 0; i < d; ++i)
      if (i != m) b.row(i) = b.row(i).cwiseProduct(table.u1.row(m));
  }
  Eigen::MatrixXd pu2 = Eigen::MatrixXd::Ones(n, n);
  for (Eigen::Index m = 0; m < d; ++m) pu2 = pu2.cwiseProduct(table.u2[static_cast<std::size_t>(m)]);

  const Eigen::VectorXd var_marginal = table.mean2 - table.mean1.cwiseAbs2();

  // Denominator of approach 1: Var_X[m(X)] assembled jointly over dimensions.
  double denom1 = gamma.dot((pu2 - u_all * u_all.transpose()) * gamma);
  if (linear) {
    for (Eigen::Index l = 0; l < d; ++l) {
      const double beta_l = gp.beta()(l + 1);
      denom1 += beta_l * beta_l * var_marginal(l);
      double cross = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        cross += gamma(j) * b(l, j) * (table.t1(l, j) - table.mean1(l) * table.u1(l, j));
      denom1 += 2.0 * beta_l * cross;
    }
  }

  SobolDecomposition dec;
  dec.predictor.total_variance = denom1;
  dec.predictor.numerators.resize(d);
  dec.global.numerators.resize(d);

  const Eigen::MatrixXd kinv = gp.correlation_inverse();
  const double w_all = table.w2.prod();
  dec.global.total_variance =
      denom1 + sigma2 * (1.0 - w_all - kinv.cwiseProduct(pu2 - u_all * u_all.transpose()).sum());

  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::MatrixXd& u2i = table.u2[static_cast<std::size_t>(i)];
    const Eigen::VectorXd u1i = table.u1.row(i).transpose();
    const Eigen::MatrixXd a_i = u2i - u1i * u1i.transpose();
    const Eigen::VectorXd s = gamma.cwiseProduct(b.row(i).transpose());

    double num1 = s.dot(a_i * s);
    if (linear) {
      const double beta_i = gp.beta()(i + 1);
      num1 += beta_i * beta_i * var_marginal(i);
      double cross = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        cross += s(j) * (table.t1(i, j) - table.mean1(i) * u1i(j));
      num1 += 2.0 * beta_i * cross;
    }
    dec.predictor.numerators(i) = num1;

    double p_rest = 1.0;
    for (Eigen::Index m = 0; m < d; ++m)
      if (m != i) p_rest *= table.w2(m);
    const Eigen::VectorXd bi = b.row(i).transpose();
    const double qf = bi.dot(kinv.cwiseProduct(a_i) * bi);
    dec.global.numerators(i) = num1 + sigma2 * (p_rest * (1.0 - table.w2(i)) - qf);
  }
  return dec;
}

namespace detail {

// Numerator / denominator with round-off clamping: indices must land in
// [-1e-3, 1 + 1e-3] and are clamped onto [0, 1]; anything further out means
// the quadrature or the model is inconsistent.  The slack covers the
// conditioning noise of the closed-form quadratic forms, which reaches the
// 1e-4 scale on near-zero indices when the correlation matrix is nearly
// singular (flat fits on large designs).
inline double finalize_index(double numerator, double denominator, Eigen::Index input,
                             const char* what) {
  constexpr double kTol = 1e-3;
  const double s = numerator / denominator;
  if (s < -kTol || s > 1.0 + kTol)
    throw std::runtime_error(std::string(what) + ": index for input " +
                             std::to_string(input + 1) + " is " + format_full(s) +
                             ", outside [0, 1] beyond round-off tolerance");
  return std::min(1.0, std::max(0.0, s));
}

inline void check_total_variance(double total, double sigma2, const char* what) {
  if (!(total > 1e-12 * std::max(sigma2, 1e-300)))
    throw std::runtime_error(std::string(what) +
                             ": total variance is numerically zero (constant predictor)");
}

}  // namespace detail

// Approach 1: indices of the conditional-mean predictor.
inline std::vector<SobolEstimate> sobol_predictor(const FittedGp& gp,
                                                  const KernelIntegralTable& table) {
  const SobolDecomposition dec = decompose(gp, table);
  detail::check_total_variance(dec.predictor.total_variance, gp.params().sigma2,
                               "sobol_predictor");
  std::vector<SobolEstimate> out;
  for (Eigen::Index i = 0; i < gp.dim(); ++i) {
    SobolEstimate e;
    e.input_index = static_cast<int>(i) + 1;
    e.approach = SobolApproach::predictor_only;
    e.value = detail::finalize_index(dec.predictor.numerators(i), dec.predictor.total_variance, i,
                                     "sobol_predictor");
    out.push_back(e);
  }
  return out;
}

// Approach 2 point estimates: mu_i = E Var_{X_i}[A_i] / E Var_X[Y].
inline std::vector<SobolEstimate> sobol_global_mean(const FittedGp& gp,
                                                    const KernelIntegralTable& table) {
  const SobolDecomposition dec = decompose(gp, table);
  detail::check_total_variance(dec.global.total_variance, gp.params().sigma2,
                               "sobol_global_mean");
  std::vector<SobolEstimate> out;
  for (Eigen::Index i = 0; i < gp.dim(); ++i) {
    SobolEstimate e;
    e.input_index = static_cast<int>(i) + 1;
    e.approach = SobolApproach::global_model;
    e.value = detail::finalize_index(dec.global.numerators(i), dec.global.total_variance, i,
                                     "sobol_global_mean");
    out.push_back(e);
  }
  return out;
}

// Approach 2 spread: the std of the randomized index from the grid moments
// of each main effect, sharing the approach-2 denominator.  The value field
// carries the grid version of the mean so callers can cross-check it against
// sobol_global_mean.
inline std::vector<SobolEstimate> sobol_global_std(const FittedGp& gp,
                                                   const KernelIntegralTable& table,
                                                   const std::vector<MainEffectProcess>& effects) {
  const SobolDecomposition dec = decompose(gp, table);
  detail::check_total_variance(dec.global.total_variance, gp.params().sigma2, "sobol_global_std");
  if (effects.size() != static_cast<std::size_t>(gp.dim()))
    throw std::invalid_argument("sobol_global_std: need one main effect per input");
  std::vector<SobolEstimate> out;
  for (std::size_t k = 0; k < effects.size(); ++k) {
    const MainEffectProcess& effect = effects[k];
    if (effect.input_index != static_cast<int>(k) + 1)
      throw std::invalid_argument("sobol_global_std: effects must be ordered by input index");
    const GridMoments moments = index_numerator_moments(effect);
    SobolEstimate e;
    e.input_index = effect.input_index;
    e.approach = SobolApproach::global_model;
    e.value = detail::finalize_index(moments.mean, dec.global.total_variance,
                                     static_cast<Eigen::Index>(k), "sobol_global_std");
    e.std_dev = std::sqrt(std::max(0.0, moments.variance)) / dec.global.total_variance;
    out.push_back(e);
  }
  return out;
}

// Sum of squared errors against the true indices.
inline double l2_error(const std::vector<SobolEstimate>& estimates, const Eigen::VectorXd& truth) {
  if (estimates.size() != static_cast<std::size_t>(truth.size()))
    throw std::invalid_argument("l2_error: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double diff = estimates[i].value - truth(static_cast<Eigen::Index>(i));
    acc += diff * diff;
  }
  return acc;
}

}  // namespace gpsobol

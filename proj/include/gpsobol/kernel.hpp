#pragma once

// Generalized exponential correlation kernel
//   R(x, u) = prod_l exp(-theta_l |x_l - u_l|^{p_l}),  theta_l >= 0, 0 < p_l <= 2,
// with the process variance carried alongside the correlation parameters.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace gpsobol {

struct KernelParams {
  Eigen::VectorXd theta;  // per-dimension range parameters, >= 0
  Eigen::VectorXd p;      // per-dimension exponents, in (0, 2]
  double sigma2 = 1.0;    // process variance, > 0

  void validate(Eigen::Index d) const {
    if (theta.size() != d || p.size() != d)
      throw std::invalid_argument("KernelParams: theta and p must have one entry per dimension");
    for (Eigen::Index l = 0; l < d; ++l) {
      if (!(theta(l) >= 0.0)) throw std::invalid_argument("KernelParams: theta must be >= 0");
      if (!(p(l) > 0.0 && p(l) <= 2.0))
        throw std::invalid_argument("KernelParams: p must lie in (0, 2]");
    }
    if (!(sigma2 > 0.0)) throw std::invalid_argument("KernelParams: sigma2 must be positive");
  }
};

// One-dimensional factor exp(-theta |dx|^p).
inline double correlation1d(double theta, double p, double dx) {
  const double a = std::abs(dx);
  if (a == 0.0 || theta == 0.0) return 1.0;
  if (p == 2.0) return std::exp(-theta * a * a);
  if (p == 1.0) return std::exp(-theta * a);
  return std::exp(-theta * std::pow(a, p));
}

inline double correlation(const KernelParams& params, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    const double a = std::abs(x(l) - u(l));
    if (a == 0.0) continue;
    const double pl = params.p(l);
    acc += params.theta(l) * (pl == 2.0 ? a * a : pl == 1.0 ? a : std::pow(a, pl));
  }
  return std::exp(-acc);
}

// Correlation matrix between the rows of two point sets (m x n result).
inline Eigen::MatrixXd correlation_matrix(const KernelParams& params, const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("correlation_matrix: dimension mismatch");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(a.rows(), b.rows());
  for (Eigen::Index l = 0; l < a.cols(); ++l) {
    const double pl = params.p(l);
    const double th = params.theta(l);
    if (th == 0.0) continue;
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double bj = b(j, l);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double dist = std::abs(a(i, l) - bj);
        acc(i, j) += th * (pl == 2.0 ? dist * dist : pl == 1.0 ? dist : std::pow(dist, pl));
      }
    }
  }
  return (-acc).array().exp();
}

// Symmetric correlation matrix of one point set.
inline Eigen::MatrixXd correlation_matrix(const KernelParams& params, const Eigen::MatrixXd& pts) {
  return correlation_matrix(params, pts, pts);
}

}  // namespace gpsobol

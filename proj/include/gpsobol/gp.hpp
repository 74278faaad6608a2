#pragma once

// Gaussian-process conditioning and prediction.  A FittedGp holds the design,
// trend, kernel parameters and the factorized training covariance; predictions
// use the universal-kriging conditional mean, variance and covariance.
//
// Numerics: the training correlation matrix K = R + nugget*I is Cholesky
// factored once (K = L L^T, correlation units).  The generalized least
// squares trend fit solves the whitened system L^{-1} F beta ~ L^{-1} y by
// column-pivoted QR, and the profiled process variance is rss / n.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpsobol/common.hpp"
#include "gpsobol/design.hpp"
#include "gpsobol/kernel.hpp"
#include "gpsobol/trend.hpp"

namespace gpsobol {

struct ValidationReport {
  enum class Method { holdout, leave_one_out };
  double q2 = 0.0;
  double rmse = 0.0;
  Eigen::Index n_test = 0;
  Method method = Method::holdout;
};

// One multistart record of the likelihood search.
struct FitStart {
  Eigen::VectorXd point;  // normalized search coordinates at the optimum
  double loglik = 0.0;
  int evaluations = 0;
};

struct FitTrace {
  std::vector<FitStart> starts;
  int best_start = -1;
  double best_loglik = 0.0;
};

class FittedGp {
 public:
  // Conditions the process on a design with responses, with the kernel
  // parameters fixed.  sigma2 empty: profiled maximum-likelihood value.
  FittedGp(Design design, TrendKind trend_kind, Eigen::VectorXd theta, Eigen::VectorXd p,
           double nugget_rel = 1e-8, std::optional<double> sigma2 = std::nullopt)
      : design_(std::move(design)), trend_(trend_kind, design_.dim()) {
    design_.validate();
    if (!design_.has_responses())
      throw std::invalid_argument("FittedGp: design must carry responses");
    const Eigen::Index n = design_.size();
    if (n < trend_.size() + 1)
      throw std::invalid_argument("FittedGp: need more points than trend basis functions");
    if (!(nugget_rel >= 0.0) || nugget_rel >= 1.0)
      throw std::invalid_argument("FittedGp: nugget must lie in [0, 1)");
    params_.theta = std::move(theta);
    params_.p = std::move(p);
    params_.sigma2 = 1.0;
    params_.validate(design_.dim());
    nugget_ = nugget_rel;

    Eigen::MatrixXd k = correlation_matrix(params_, design_.points);
    k.diagonal().array() += nugget_;
    llt_.compute(k);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error(
          "FittedGp: covariance factorization failed (near-duplicate design points?)");

    const Eigen::MatrixXd f = trend_.matrix(design_.points);
    const Eigen::MatrixXd fw = llt_.matrixL().solve(f);
    const Eigen::VectorXd yw = llt_.matrixL().solve(design_.responses);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fw);
    if (qr.rank() < trend_.size())
      throw std::runtime_error("FittedGp: trend basis is rank deficient on this design");
    beta_ = qr.solve(yw);
    const double rss = (yw - fw * beta_).squaredNorm();

    if (sigma2.has_value()) {
      if (!(*sigma2 > 0.0)) throw std::invalid_argument("FittedGp: sigma2 must be positive");
      params_.sigma2 = *sigma2;
    } else {
      const double y_var = n > 1 ? variance_of(design_.responses) : 0.0;
      params_.sigma2 =
          std::max(rss / static_cast<double>(n),
                   1e-15 * y_var + std::numeric_limits<double>::min());
    }

    const Eigen::VectorXd residual = design_.responses - f * beta_;
    gamma_ = llt_.solve(residual);
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(llt_.matrixLLT()(i, i));
    // Profile log-likelihood; with sigma2 given, the same expression evaluated
    // at that value.
    const double nd = static_cast<double>(n);
    loglik_ = -0.5 * nd * std::log(2.0 * M_PI * params_.sigma2) - log_det_half -
              0.5 * rss / params_.sigma2;
  }

  const Design& design() const { return design_; }
  const TrendBasis& trend() const { return trend_; }
  const KernelParams& params() const { return params_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  double nugget() const { return nugget_; }
  double log_likelihood() const { return loglik_; }
  Eigen::Index size() const { return design_.size(); }
  Eigen::Index dim() const { return design_.dim(); }

  // Lower Cholesky factor of the training covariance sigma2 * (R + nugget I).
  Eigen::MatrixXd chol() const {
    return std::sqrt(params_.sigma2) * Eigen::MatrixXd(llt_.matrixL());
  }

  // (sigma2 (R + nugget I))^{-1} (y - F beta); predict_mean(x) is
  // F(x) beta + cov_vector(x) . alpha.
  Eigen::VectorXd alpha() const { return gamma_ / params_.sigma2; }

  // K^{-1} (y - F beta) in correlation units.
  const Eigen::VectorXd& gamma() const { return gamma_; }

  // K^{-1} B in correlation units.
  Eigen::MatrixXd solve_correlation(const Eigen::MatrixXd& b) const { return llt_.solve(b); }

  // Dense K^{-1} in correlation units (n x n; used by the analytic index
  // formulas, which need the full matrix).
  Eigen::MatrixXd correlation_inverse() const {
    return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
  }

  Eigen::VectorXd correlation_vector(const Eigen::VectorXd& x) const {
    check_point(x);
    Eigen::VectorXd r(size());
    for (Eigen::Index i = 0; i < size(); ++i)
      r(i) = correlation(params_, design_.points.row(i).transpose(), x);
    return r;
  }

  double predict_mean(const Eigen::VectorXd& x) const {
    return trend_.row(x).dot(beta_) + correlation_vector(x).dot(gamma_);
  }

  Eigen::VectorXd predict_mean_many(const Eigen::MatrixXd& pts) const {
    if (pts.cols() != dim()) throw std::invalid_argument("predict_mean_many: dimension mismatch");
    const Eigen::MatrixXd cross = correlation_matrix(params_, pts, design_.points);
    return trend_.matrix(pts) * beta_ + cross * gamma_;
  }

  // Conditional variance sigma2 (1 - r^T K^{-1} r), clamped at zero against
  // roundoff.  With the nugget inside K this stays nonnegative in exact
  // arithmetic and equals about nugget * sigma2 at a design point.
  double predict_var(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd w = llt_.matrixL().solve(correlation_vector(x));
    const double v = params_.sigma2 * (1.0 - w.squaredNorm());
    if (v < -1e-8 * params_.sigma2)
      throw std::runtime_error("predict_var: conditional variance below roundoff tolerance");
    return std::max(0.0, v);
  }

  // Conditional covariance sigma2 (R(x, u) - r(x)^T K^{-1} r(u)).
  double predict_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    const Eigen::VectorXd wx = llt_.matrixL().solve(correlation_vector(x));
    const Eigen::VectorXd wu = llt_.matrixL().solve(correlation_vector(u));
    return params_.sigma2 * (correlation(params_, x, u) - wx.dot(wu));
  }

  const FitTrace* trace() const { return trace_ ? trace_.get() : nullptr; }
  void set_trace(FitTrace trace) { trace_ = std::make_shared<FitTrace>(std::move(trace)); }

 private:
  void check_point(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("FittedGp: query dimension mismatch");
  }

  Design design_;
  TrendBasis trend_;
  KernelParams params_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd gamma_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double nugget_ = 0.0;
  double loglik_ = 0.0;
  std::shared_ptr<FitTrace> trace_;
};

// Predictivity coefficient on a holdout set:
// Q2 = 1 - sum (y - m(x))^2 / sum (y - mean y)^2.
inline ValidationReport q2_score(const FittedGp& gp, const Design& test) {
  test.validate();
  if (!test.has_responses()) throw std::invalid_argument("q2_score: test set must carry responses");
  if (test.size() < 2) throw std::invalid_argument("q2_score: need at least two test points");
  const Eigen::VectorXd pred = gp.predict_mean_many(test.points);
  const double sse = (test.responses - pred).squaredNorm();
  const double sst = (test.responses.array() - test.responses.mean()).square().sum();
  if (sst <= 0.0) throw std::invalid_argument("q2_score: test responses are constant");
  ValidationReport report;
  report.q2 = 1.0 - sse / sst;
  report.rmse = std::sqrt(sse / static_cast<double>(test.size()));
  report.n_test = test.size();
  report.method = ValidationReport::Method::holdout;
  return report;
}

// Leave-one-out Q2 by virtual cross-validation: with
// Q = K^{-1} - K^{-1} F (F^T K^{-1} F)^{-1} F^T K^{-1}, the LOO residual at
// point i is (Q y)_i / Q_ii, so no model is refitted.
inline ValidationReport loo_q2(const FittedGp& gp) {
  const Eigen::Index n = gp.size();
  if (n < 3) throw std::invalid_argument("loo_q2: need at least three design points");
  const Eigen::MatrixXd kinv = gp.correlation_inverse();
  const Eigen::MatrixXd f = gp.trend().matrix(gp.design().points);
  const Eigen::MatrixXd kf = kinv * f;
  const Eigen::MatrixXd q =
      kinv - kf * (f.transpose() * kf).ldlt().solve(kf.transpose());
  const Eigen::VectorXd qy = q * gp.design().responses;
  double sse = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(q(i, i) > 0.0)) throw std::runtime_error("loo_q2: degenerate leave-one-out system");
    const double e = qy(i) / q(i, i);
    sse += e * e;
  }
  const double sst = (gp.design().responses.array() - gp.design().responses.mean()).square().sum();
  if (sst <= 0.0) throw std::invalid_argument("loo_q2: responses are constant");
  ValidationReport report;
  report.q2 = 1.0 - sse / sst;
  report.rmse = std::sqrt(sse / static_cast<double>(n));
  report.n_test = n;
  report.method = ValidationReport::Method::leave_one_out;
  return report;
}

}  // namespace gpsobol

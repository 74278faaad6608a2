#pragma once

// Maximum-likelihood estimation of the kernel parameters.  The profile
// log-likelihood (beta and sigma2 concentrated out) is maximized by a
// Hooke-Jeeves pattern search over normalized coordinates in [0, 1]^m:
// each theta_l is parameterized as log(theta_l * range_l^{p_l}) spanning
// configurable bounds (default [log 1e-3, log 1e3]), and optionally each
// exponent p_l spans [0.5, 2].
// The search restarts from a small maximin Latin hypercube of start points.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "gpsobol/common.hpp"
#include "gpsobol/design.hpp"
#include "gpsobol/gp.hpp"

namespace gpsobol {

struct FitOptions {
  bool estimate_p = false;        // search over the exponents as well
  double p_exponent = 2.0;        // exponent used when estimate_p is false
  double nugget = 1e-8;           // relative nugget added to the correlation
  int multistarts = 5;
  double step_tol = 1e-4;         // pattern-search step threshold (unit box)
  int max_evaluations = 2000;     // likelihood evaluations per start
  double theta_scaled_min = 1e-3;  // bounds on theta_l * range_l^{p_l}
  double theta_scaled_max = 1e3;
  std::uint64_t seed = 0;
  bool keep_trace = true;
  std::optional<Eigen::VectorXd> fixed_theta;  // skip the search entirely
  std::optional<Eigen::VectorXd> fixed_p;
};

// Profile log-likelihood of (theta, p) with beta and sigma2 concentrated
// out; empty when the correlation matrix cannot be factorized or the trend
// is rank deficient at these parameters.
inline std::optional<double> profile_log_likelihood(const Design& design, TrendKind trend_kind,
                                                    const Eigen::VectorXd& theta,
                                                    const Eigen::VectorXd& p, double nugget) {
  KernelParams params;
  params.theta = theta;
  params.p = p;
  params.validate(design.dim());
  Eigen::MatrixXd k = correlation_matrix(params, design.points);
  k.diagonal().array() += nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const TrendBasis trend(trend_kind, design.dim());
  const Eigen::MatrixXd fw = llt.matrixL().solve(trend.matrix(design.points));
  const Eigen::VectorXd yw = llt.matrixL().solve(design.responses);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fw);
  if (qr.rank() < trend.size()) return std::nullopt;
  const double n = static_cast<double>(design.size());
  const double rss = (yw - fw * qr.solve(yw)).squaredNorm();
  const double sigma2 = std::max(rss / n, std::numeric_limits<double>::min());
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < design.size(); ++i) log_det_half += std::log(llt.matrixLLT()(i, i));
  return -0.5 * n * std::log(2.0 * M_PI * sigma2) - log_det_half - 0.5 * rss / sigma2;
}

namespace detail {

struct PatternSearchResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Hooke-Jeeves minimization on the unit box: exploratory coordinate moves
// followed by pattern moves while they help, halving the step otherwise.
inline PatternSearchResult hooke_jeeves(const std::function<double(const Eigen::VectorXd&)>& f,
                                        Eigen::VectorXd x0, double init_step, double step_tol,
                                        int max_evaluations) {
  const Eigen::Index m = x0.size();
  for (Eigen::Index l = 0; l < m; ++l) x0(l) = clamp01(x0(l));
  PatternSearchResult result;
  result.x = x0;
  result.value = f(x0);
  result.evaluations = 1;

  const auto explore = [&](Eigen::VectorXd from, double from_value, double step) {
    for (Eigen::Index l = 0; l < m && result.evaluations < max_evaluations; ++l) {
      for (const double sign : {1.0, -1.0}) {
        Eigen::VectorXd cand = from;
        cand(l) = clamp01(from(l) + sign * step);
        if (cand(l) == from(l)) continue;
        const double fc = f(cand);
        ++result.evaluations;
        if (fc < from_value) {
          from = std::move(cand);
          from_value = fc;
          break;
        }
      }
    }
    return std::make_pair(from, from_value);
  };

  double step = init_step;
  while (step > step_tol && result.evaluations < max_evaluations) {
    auto [probe, probe_value] = explore(result.x, result.value, step);
    if (probe_value < result.value) {
      // Keep extrapolating along the improving direction.
      while (probe_value < result.value && result.evaluations < max_evaluations) {
        Eigen::VectorXd tentative = probe + (probe - result.x);
        for (Eigen::Index l = 0; l < m; ++l) tentative(l) = clamp01(tentative(l));
        result.x = probe;
        result.value = probe_value;
        const double ft = f(tentative);
        ++result.evaluations;
        std::tie(probe, probe_value) =
            explore(std::move(tentative), ft, step);
      }
    } else {
      step *= 0.5;
    }
  }
  return result;
}

}  // namespace detail

// Fits a GP to the design by profile maximum likelihood.
inline FittedGp fit_gp(const Design& design, const InputSpace& space, TrendKind trend_kind,
                       const FitOptions& options = {}) {
  design.validate();
  if (!design.has_responses()) throw std::invalid_argument("fit_gp: design must carry responses");
  if (design.dim() != space.dim())
    throw std::invalid_argument("fit_gp: design and input space dimensions differ");
  for (Eigen::Index i = 0; i < design.size(); ++i)
    if (!space.contains(design.points.row(i).transpose()))
      throw std::invalid_argument("fit_gp: design point " + std::to_string(i) +
                                  " lies outside the input space box");
  const double y_spread =
      design.responses.maxCoeff() - design.responses.minCoeff();
  if (!(y_spread > 0.0)) throw std::invalid_argument("fit_gp: responses are constant");
  if (!(options.nugget >= 0.0 && options.nugget < 1.0))
    throw std::invalid_argument("fit_gp: nugget must lie in [0, 1)");
  if (!(options.p_exponent > 0.0 && options.p_exponent <= 2.0))
    throw std::invalid_argument("fit_gp: p_exponent must lie in (0, 2]");
  if (!(options.theta_scaled_min > 0.0 && options.theta_scaled_min < options.theta_scaled_max))
    throw std::invalid_argument("fit_gp: scaled theta bounds must satisfy 0 < min < max");

  const Eigen::Index d = design.dim();

  if (options.fixed_theta.has_value()) {
    Eigen::VectorXd p = options.fixed_p.value_or(
        Eigen::VectorXd::Constant(d, options.p_exponent));
    return FittedGp(design, trend_kind, *options.fixed_theta, std::move(p), options.nugget);
  }
  if (options.multistarts < 1) throw std::invalid_argument("fit_gp: multistarts must be positive");

  const Eigen::VectorXd range = space.upper() - space.lower();
  const double psi_lo = std::log(options.theta_scaled_min);
  const double psi_hi = std::log(options.theta_scaled_max);
  const Eigen::Index m = options.estimate_p ? 2 * d : d;

  const auto decode = [&](const Eigen::VectorXd& c) {
    Eigen::VectorXd theta(d), p(d);
    for (Eigen::Index l = 0; l < d; ++l) {
      p(l) = options.estimate_p ? 0.5 + 1.5 * c(d + l) : options.p_exponent;
      if (options.fixed_p.has_value()) p(l) = (*options.fixed_p)(l);
      const double psi = psi_lo + (psi_hi - psi_lo) * c(l);
      theta(l) = std::exp(psi) / std::pow(range(l), p(l));
    }
    return std::make_pair(theta, p);
  };

  const auto objective = [&](const Eigen::VectorXd& c) {
    const auto [theta, p] = decode(c);
    const auto ll = profile_log_likelihood(design, trend_kind, theta, p, options.nugget);
    return ll.has_value() ? -*ll : std::numeric_limits<double>::infinity();
  };

  Rng rng(mix_seed(options.seed, 0xf17u));
  const Eigen::MatrixXd starts = maximin_lhs_unit(options.multistarts, m, rng);

  FitTrace trace;
  trace.best_loglik = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_coords;
  for (int s = 0; s < options.multistarts; ++s) {
    const auto run = detail::hooke_jeeves(objective, starts.row(s).transpose(), 0.25,
                                          options.step_tol, options.max_evaluations);
    FitStart record;
    record.point = run.x;
    record.loglik = -run.value;
    record.evaluations = run.evaluations;
    trace.starts.push_back(std::move(record));
    if (-run.value > trace.best_loglik) {
      trace.best_loglik = -run.value;
      trace.best_start = s;
      best_coords = run.x;
    }
  }
  if (trace.best_start < 0 || !std::isfinite(trace.best_loglik))
    throw std::runtime_error("fit_gp: likelihood search failed at every start point");

  const auto [theta, p] = decode(best_coords);
  FittedGp gp(design, trend_kind, theta, p, options.nugget);
  log_info("fit_gp: best log-likelihood " + format_full(gp.log_likelihood()) + " from start " +
           std::to_string(trace.best_start + 1) + " of " + std::to_string(options.multistarts));
  if (options.keep_trace) gp.set_trace(std::move(trace));
  return gp;
}

}  // namespace gpsobol

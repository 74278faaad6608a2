#pragma once

// Conditional distribution of a main effect A_i(g) = E_{X_{-i}}[Y | X_i = g]
// on a discretized grid, and simulation of the resulting randomized
// sensitivity index.  Averaging the GP over the other inputs leaves a
// Gaussian process in the remaining coordinate whose mean and covariance
// have closed forms in the kernel-integral primitives; sampling its paths on
// the grid yields draws of the index numerator, hence of the index itself.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpsobol/common.hpp"
#include "gpsobol/distributions.hpp"
#include "gpsobol/gp.hpp"
#include "gpsobol/kernel_integrals.hpp"

namespace gpsobol {

struct MainEffectProcess {
  int input_index = 0;      // one-based input index
  Eigen::VectorXd grid;     // quantile-spaced points in the marginal support
  Eigen::VectorXd weights;  // probability weights of the grid cells (sum 1)
  Eigen::VectorXd mean;     // conditional mean of the effect on the grid
  Eigen::MatrixXd cov;      // conditional covariance on the grid (symmetric)
  double sigma2 = 0.0;      // process variance of the underlying model

  Eigen::Index grid_size() const { return grid.size(); }
};

struct SimulationConfig {
  int n_dis = 200;           // grid size, at least 8
  int k_sim = 10000;         // simulated paths, at least 100
  std::uint64_t seed = 0;
  double jitter = 0.0;       // 0: automatic ladder relative to sigma2

  void validate() const {
    if (n_dis < 8) throw std::invalid_argument("SimulationConfig: n_dis must be at least 8");
    if (k_sim < 100) throw std::invalid_argument("SimulationConfig: k_sim must be at least 100");
    if (!(jitter >= 0.0)) throw std::invalid_argument("SimulationConfig: jitter must be >= 0");
  }
};

// Builds the main-effect process of one input on an n_dis-point grid placed
// at the marginal quantiles of cell midpoints, with uniform weights.
inline MainEffectProcess build_main_effect(const FittedGp& gp, const InputSpace& space,
                                           const KernelIntegralTable& table, int input_index,
                                           int n_dis) {
  if (input_index < 1 || input_index > gp.dim())
    throw std::invalid_argument("build_main_effect: input index out of range (one-based)");
  if (n_dis < 8) throw std::invalid_argument("build_main_effect: n_dis must be at least 8");
  if (table.dim() != gp.dim() || table.design_size() != gp.size())
    throw std::invalid_argument("build_main_effect: table does not match the model");

  const Eigen::Index d = gp.dim(), n = gp.size();
  const Eigen::Index i = input_index - 1;
  const InputDistribution& marginal = space.marginal(i);
  const double theta = gp.params().theta(i);
  const double p = gp.params().p(i);

  MainEffectProcess effect;
  effect.input_index = input_index;
  effect.sigma2 = gp.params().sigma2;
  effect.grid.resize(n_dis);
  for (int a = 0; a < n_dis; ++a)
    effect.grid(a) = marginal.quantile((static_cast<double>(a) + 0.5) / n_dis);
  effect.weights = Eigen::VectorXd::Constant(n_dis, 1.0 / n_dis);

  // b(j) = prod_{m != i} u1[m](j); p_rest = prod_{m != i} w2[m].
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  double p_rest = 1.0;
  for (Eigen::Index m = 0; m < d; ++m) {
    if (m == i) continue;
    b = b.cwiseProduct(table.u1.row(m).transpose());
    p_rest *= table.w2(m);
  }

  // Trend averaged over the other inputs: constant part plus beta_i g for a
  // linear trend.
  double c0 = gp.beta()(0);
  double slope = 0.0;
  if (gp.trend().kind() == TrendKind::linear) {
    for (Eigen::Index m = 0; m < d; ++m)
      if (m != i) c0 += gp.beta()(m + 1) * table.mean1(m);
    slope = gp.beta()(i + 1);
  }

  Eigen::MatrixXd e1(n_dis, n);  // e1(a, j) = R_i(g_a - x_ji) b(j)
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xj = gp.design().points(j, i);
    for (int a = 0; a < n_dis; ++a)
      e1(a, j) = correlation1d(theta, p, effect.grid(a) - xj) * b(j);
  }

  effect.mean = Eigen::VectorXd::Constant(n_dis, c0) + slope * effect.grid + e1 * gp.gamma();

  Eigen::MatrixXd r_grid(n_dis, n_dis);
  for (int a = 0; a < n_dis; ++a)
    for (int bb = 0; bb <= a; ++bb) {
      const double r = correlation1d(theta, p, effect.grid(a) - effect.grid(bb));
      r_grid(a, bb) = r;
      r_grid(bb, a) = r;
    }
  Eigen::MatrixXd cov = effect.sigma2 * (p_rest * r_grid - e1 * gp.solve_correlation(e1.transpose()));
  effect.cov = 0.5 * (cov + cov.transpose());
  return effect;
}

// Mean and variance of the discretized numerator V = sum_a w_a (A(g_a) -
// sum_b w_b A(g_b))^2.  For a Gaussian vector A ~ N(mu, C) and the centering
// form Q = diag(w) - w w^T this is the standard quadratic-form identity
//   E[V] = tr(Q C) + mu^T Q mu,
//   Var[V] = 2 tr((Q C)^2) + 4 mu^T Q C Q mu.
struct GridMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline GridMoments index_numerator_moments(const MainEffectProcess& effect) {
  const Eigen::VectorXd& w = effect.weights;
  const Eigen::VectorXd& mu = effect.mean;
  const Eigen::MatrixXd& c = effect.cov;
  const Eigen::VectorXd cw = c * w;
  // m = Q C with Q = diag(w) - w w^T, applied by rows.
  const Eigen::MatrixXd m = w.asDiagonal() * c - w * cw.transpose();
  const Eigen::VectorXd qmu = w.cwiseProduct(mu) - w * w.dot(mu);
  GridMoments out;
  out.mean = m.trace() + mu.dot(qmu);
  out.variance = 2.0 * m.cwiseProduct(m.transpose()).sum() + 4.0 * qmu.dot(c * qmu);
  return out;
}

// Empirical distribution of a randomized sensitivity index.
class IndexDistribution {
 public:
  IndexDistribution(int input_index, Eigen::VectorXd samples)
      : input_index_(input_index), samples_(std::move(samples)) {
    if (samples_.size() < 2)
      throw std::invalid_argument("IndexDistribution: need at least two samples");
    sorted_ = samples_;
    std::sort(sorted_.data(), sorted_.data() + sorted_.size());
  }

  int input_index() const { return input_index_; }
  const Eigen::VectorXd& samples() const { return samples_; }
  double mean() const { return samples_.mean(); }
  double std_dev() const { return stddev_of(samples_); }
  double quantile(double q) const { return quantile_sorted(sorted_, q); }

  // Equal-tailed confidence interval from the empirical quantiles.
  ConfidenceInterval confidence_interval(double level) const {
    if (!(level > 0.0 && level < 1.0))
      throw std::invalid_argument("confidence_interval: level must lie in (0, 1)");
    ConfidenceInterval ci;
    ci.level = level;
    ci.lower = quantile(0.5 * (1.0 - level));
    ci.upper = quantile(0.5 * (1.0 + level));
    return ci;
  }

 private:
  int input_index_;
  Eigen::VectorXd samples_;
  Eigen::VectorXd sorted_;
};

namespace detail {

// Factor of the effect covariance usable for sampling: Cholesky with a
// jitter ladder, falling back to an eigendecomposition with negative
// eigenvalues (within roundoff of zero) clipped.
inline Eigen::MatrixXd sampling_factor(const MainEffectProcess& effect, double jitter) {
  const Eigen::Index m = effect.cov.rows();
  if (effect.cov.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(m, m);
  double j = jitter > 0.0 ? jitter : 1e-10 * std::max(effect.sigma2, 1e-300);
  const double j_max = 1e-6 * std::max(effect.sigma2, 1e-300);
  while (j <= j_max) {
    Eigen::MatrixXd k = effect.cov;
    k.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    j *= 10.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(effect.cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("simulate_index: eigendecomposition of the effect covariance failed");
  if (eig.eigenvalues().minCoeff() < -1e-8 * std::max(effect.sigma2, 1e-300))
    throw std::runtime_error(
        "simulate_index: effect covariance is not positive semidefinite beyond roundoff");
  Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * scale.asDiagonal();
}

}  // namespace detail

// Draws k_sim paths of the main-effect process on its grid and converts each
// into one sample of the index: S = [sum w A^2 - (sum w A)^2] / denominator.
// Draw c always uses the stream mix_seed(seed, c), so results do not depend
// on chunking.
inline IndexDistribution simulate_index(const MainEffectProcess& effect, double denominator,
                                        const SimulationConfig& config) {
  config.validate();
  if (effect.grid_size() != config.n_dis)
    throw std::invalid_argument("simulate_index: effect grid does not match n_dis");
  if (!(denominator > 0.0))
    throw std::invalid_argument("simulate_index: denominator must be positive");

  const Eigen::MatrixXd factor = detail::sampling_factor(effect, config.jitter);
  const Eigen::Index m = effect.grid_size();
  const Eigen::VectorXd& w = effect.weights;

  Eigen::VectorXd samples(config.k_sim);
  const int chunk = std::max(1, static_cast<int>(std::min<std::int64_t>(
                                    config.k_sim, 4'000'000 / std::max<Eigen::Index>(m, 1))));
  Eigen::MatrixXd z(m, chunk);
  for (int first = 0; first < config.k_sim; first += chunk) {
    const int cols = std::min(chunk, config.k_sim - first);
    for (int c = 0; c < cols; ++c) {
      Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(first + c)));
      for (Eigen::Index a = 0; a < m; ++a) z(a, c) = rng.normal();
    }
    const Eigen::MatrixXd paths =
        (factor * z.leftCols(cols)).colwise() + effect.mean;
    for (int c = 0; c < cols; ++c) {
      const double m1 = w.dot(paths.col(c));
      const double m2 = w.dot(paths.col(c).cwiseAbs2());
      samples(first + c) = std::max(0.0, m2 - m1 * m1) / denominator;
    }
  }
  return IndexDistribution(effect.input_index, std::move(samples));
}

struct EffectConvergenceReport {
  int n_dis = 0;
  int k_sim = 0;
  double grid_mean_drift = 0.0;  // analytic index mean, n_dis vs 2 n_dis
  double grid_std_drift = 0.0;   // analytic index std, n_dis vs 2 n_dis
  double sim_mean_drift = 0.0;   // empirical mean, k_sim vs 2 k_sim
  double sim_std_drift = 0.0;    // empirical std, k_sim vs 2 k_sim
  bool converged = false;
};

// Checks whether (n_dis, k_sim) are large enough: the analytic grid moments
// must be stable under doubling n_dis and the empirical moments under
// doubling k_sim, all within 2% relative drift.
inline EffectConvergenceReport convergence_check(const FittedGp& gp, const InputSpace& space,
                                                 const KernelIntegralTable& table, int input_index,
                                                 double denominator,
                                                 const SimulationConfig& config) {
  config.validate();
  if (!(denominator > 0.0))
    throw std::invalid_argument("convergence_check: denominator must be positive");
  const auto rel_drift = [](double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
  };

  const MainEffectProcess base = build_main_effect(gp, space, table, input_index, config.n_dis);
  const MainEffectProcess fine =
      build_main_effect(gp, space, table, input_index, 2 * config.n_dis);
  const GridMoments gm_base = index_numerator_moments(base);
  const GridMoments gm_fine = index_numerator_moments(fine);

  EffectConvergenceReport report;
  report.n_dis = config.n_dis;
  report.k_sim = config.k_sim;
  report.grid_mean_drift = rel_drift(gm_base.mean / denominator, gm_fine.mean / denominator);
  report.grid_std_drift = rel_drift(std::sqrt(std::max(0.0, gm_base.variance)) / denominator,
                                    std::sqrt(std::max(0.0, gm_fine.variance)) / denominator);

  const IndexDistribution sim_base = simulate_index(base, denominator, config);
  SimulationConfig doubled = config;
  doubled.k_sim = 2 * config.k_sim;
  const IndexDistribution sim_fine = simulate_index(base, denominator, doubled);
  report.sim_mean_drift = rel_drift(sim_base.mean(), sim_fine.mean());
  report.sim_std_drift = rel_drift(sim_base.std_dev(), sim_fine.std_dev());

  constexpr double kMaxDrift = 0.02;
  report.converged = report.grid_mean_drift <= kMaxDrift && report.grid_std_drift <= kMaxDrift &&
                     report.sim_mean_drift <= kMaxDrift && report.sim_std_drift <= kMaxDrift;
  return report;
}

}  // namespace gpsobol

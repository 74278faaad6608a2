#pragma once

// Benchmark functions with analytic first-order indices, a pick-freeze
// Monte-Carlo estimator, and the convergence / coverage studies whose CSV
// outputs feed the result tables and figures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsobol/common.hpp"
#include "gpsobol/design.hpp"
#include "gpsobol/distributions.hpp"
#include "gpsobol/fit.hpp"
#include "gpsobol/gp.hpp"
#include "gpsobol/kernel_integrals.hpp"
#include "gpsobol/main_effect.hpp"
#include "gpsobol/sobol.hpp"

namespace gpsobol {

struct TestFunction {
  std::string name;
  InputSpace space;
  std::function<double(const Eigen::VectorXd&)> evaluate;
  Eigen::VectorXd true_indices;

  Eigen::Index dim() const { return space.dim(); }
};

// Multiplicative benchmark: f(x) = prod_k (|4 x_k - 2| + a_k) / (1 + a_k) on
// uniform [0,1]^d.  First-order variances are V_k = 1/(3 (1+a_k)^2) and the
// total variance is prod (1 + V_k) - 1.
inline TestFunction gsobol(const Eigen::VectorXd& a) {
  if (a.size() < 1) throw std::invalid_argument("gsobol: need at least one coefficient");
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (!(a(k) >= 0.0)) throw std::invalid_argument("gsobol: coefficients must be nonnegative");
  TestFunction fn;
  fn.name = "gsobol";
  std::vector<InputDistribution> dims;
  for (Eigen::Index k = 0; k < a.size(); ++k) dims.push_back(InputDistribution::uniform(0.0, 1.0));
  fn.space = InputSpace(std::move(dims));
  const Eigen::VectorXd coeff = a;
  fn.evaluate = [coeff](const Eigen::VectorXd& x) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < coeff.size(); ++k)
      prod *= (std::abs(4.0 * x(k) - 2.0) + coeff(k)) / (1.0 + coeff(k));
    return prod;
  };
  Eigen::VectorXd v(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) v(k) = 1.0 / (3.0 * (1.0 + a(k)) * (1.0 + a(k)));
  double total = 1.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) total *= 1.0 + v(k);
  total -= 1.0;
  fn.true_indices = v / total;
  return fn;
}

// Default coefficients (0, 1, 4.5, 9, 99): five inputs with strongly graded
// importance, true indices (0.7164, 0.1791, 0.0237, 0.0072, 0.0001).
inline TestFunction gsobol() {
  Eigen::VectorXd a(5);
  a << 0.0, 1.0, 4.5, 9.0, 99.0;
  return gsobol(a);
}

// f(x) = sin x1 + 7 sin^2 x2 + 0.1 x3^4 sin x1 on uniform [-pi, pi]^3; true
// indices (0.3139, 0.4424, 0).
inline TestFunction ishigami() {
  constexpr double kA = 7.0, kB = 0.1;
  TestFunction fn;
  fn.name = "ishigami";
  std::vector<InputDistribution> dims;
  for (int k = 0; k < 3; ++k) dims.push_back(InputDistribution::uniform(-M_PI, M_PI));
  fn.space = InputSpace(std::move(dims));
  fn.evaluate = [](const Eigen::VectorXd& x) {
    const double s1 = std::sin(x(0));
    return s1 + kA * std::sin(x(1)) * std::sin(x(1)) + kB * std::pow(x(2), 4) * s1;
  };
  const double pi4 = std::pow(M_PI, 4);
  const double v1 = 0.5 * std::pow(1.0 + kB * pi4 / 5.0, 2);
  const double v2 = kA * kA / 8.0;
  const double total = v1 + v2 + kB * kB * pi4 * pi4 * (1.0 / 18.0 - 1.0 / 50.0);
  fn.true_indices.resize(3);
  fn.true_indices << v1 / total, v2 / total, 0.0;
  return fn;
}

struct PickFreezeResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_pairs = 0;
};

// First-order pick-freeze estimator: two independent input samples share
// column i; the index is estimated from the paired outputs as
//   S = [mean(yA yC) - m^2] / [mean((yA^2 + yC^2)/2) - m^2],
// with m = mean((yA + yC)/2).  The standard error comes from the spread of
// per-block estimates.  Evaluation streams pair by pair in O(1) memory.
inline PickFreezeResult pick_freeze(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const InputSpace& space, int input_index, std::int64_t n_pairs,
                                    std::uint64_t seed, int blocks = 20) {
  if (n_pairs < 1000) throw std::invalid_argument("pick_freeze: need at least 1000 pairs");
  if (input_index < 1 || input_index > space.dim())
    throw std::invalid_argument("pick_freeze: input index out of range (one-based)");
  if (blocks < 2 || blocks > n_pairs) throw std::invalid_argument("pick_freeze: bad block count");
  const Eigen::Index d = space.dim();
  const Eigen::Index i = input_index - 1;

  struct Sums {
    double a = 0.0, c = 0.0, ac = 0.0, a2 = 0.0, c2 = 0.0;
    std::int64_t count = 0;
  };
  std::vector<Sums> block_sums(static_cast<std::size_t>(blocks));

  Eigen::VectorXd xa(d), xc(d);
  for (std::int64_t k = 0; k < n_pairs; ++k) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    for (Eigen::Index l = 0; l < d; ++l) xa(l) = space.marginal(l).quantile(rng.uniform01());
    for (Eigen::Index l = 0; l < d; ++l) {
      const double u = rng.uniform01();
      xc(l) = l == i ? xa(l) : space.marginal(l).quantile(u);
    }
    const double ya = f(xa), yc = f(xc);
    Sums& s = block_sums[static_cast<std::size_t>(k * blocks / n_pairs)];
    s.a += ya;
    s.c += yc;
    s.ac += ya * yc;
    s.a2 += ya * ya;
    s.c2 += yc * yc;
    ++s.count;
  }

  const auto janon = [](const Sums& s) {
    const double n = static_cast<double>(s.count);
    const double m = (s.a + s.c) / (2.0 * n);
    const double num = s.ac / n - m * m;
    const double den = (s.a2 + s.c2) / (2.0 * n) - m * m;
    if (!(den > 0.0)) throw std::runtime_error("pick_freeze: zero output variance");
    return num / den;
  };

  Sums total;
  Eigen::VectorXd block_estimates(blocks);
  for (int b = 0; b < blocks; ++b) {
    const Sums& s = block_sums[static_cast<std::size_t>(b)];
    block_estimates(b) = janon(s);
    total.a += s.a;
    total.c += s.c;
    total.ac += s.ac;
    total.a2 += s.a2;
    total.c2 += s.c2;
    total.count += s.count;
  }

  PickFreezeResult result;
  result.estimate = janon(total);
  result.std_error = stddev_of(block_estimates) / std::sqrt(static_cast<double>(blocks));
  result.n_pairs = n_pairs;
  return result;
}

struct StudyConfig {
  TrendKind trend = TrendKind::linear;
  FitOptions fit;                // per-replicate seed is derived internally
  Eigen::Index n_test = 10000;   // holdout size for Q2
  int table_nodes = 0;           // 0: refine_until_stable at quad_tol
  double quad_tol = 1e-8;
  SimulationConfig sim;          // used by coverage studies
  std::uint64_t seed = 0;
  int threads = 1;
};

struct StudyRow {
  Eigen::Index n = 0;
  int replicate = 0;
  double q2 = 0.0;
  Eigen::VectorXd predictor;    // approach-1 indices
  Eigen::VectorXd global_mean;  // approach-2 means
  Eigen::VectorXd global_std;   // empirical std of the simulated index (coverage runs)
  Eigen::VectorXd ci_lower, ci_upper;
  std::vector<std::uint8_t> ci_hit;
  double err_predictor = 0.0;
  double err_global = 0.0;
};

struct StudyResult {
  std::string function;
  Eigen::VectorXd truth;
  double ci_level = 0.0;  // 0 when the study ran without simulation
  std::vector<StudyRow> rows;
};

namespace detail {

inline StudyResult run_study(const TestFunction& fn, const std::vector<Eigen::Index>& sizes,
                             int replicates, std::optional<double> level,
                             const StudyConfig& config) {
  if (sizes.empty()) throw std::invalid_argument("run_study: empty size list");
  if (replicates < 1) throw std::invalid_argument("run_study: replicates must be positive");
  if (config.n_test < 2) throw std::invalid_argument("run_study: n_test must be at least 2");
  const Eigen::Index d = fn.dim();
  StudyResult result;
  result.function = fn.name;
  result.truth = fn.true_indices;
  result.ci_level = level.value_or(0.0);
  result.rows.resize(sizes.size() * static_cast<std::size_t>(replicates));

  parallel_for(static_cast<std::int64_t>(result.rows.size()), config.threads,
               [&](std::int64_t idx) {
    const std::size_t si = static_cast<std::size_t>(idx) / static_cast<std::size_t>(replicates);
    const int rep = static_cast<int>(idx % replicates);
    const Eigen::Index n = sizes[si];
    const std::uint64_t work_seed = mix_seed(config.seed, static_cast<std::uint64_t>(idx));

    Design design = lhs_sample(fn.space, n, mix_seed(work_seed, 1));
    design.responses.resize(n);
    for (Eigen::Index r = 0; r < n; ++r)
      design.responses(r) = fn.evaluate(design.points.row(r).transpose());

    Design test;
    test.points = sample_iid(fn.space, config.n_test, mix_seed(work_seed, 2));
    test.responses.resize(config.n_test);
    for (Eigen::Index r = 0; r < config.n_test; ++r)
      test.responses(r) = fn.evaluate(test.points.row(r).transpose());

    FitOptions fit = config.fit;
    fit.seed = mix_seed(work_seed, 3);
    const FittedGp gp = fit_gp(design, fn.space, config.trend, fit);
    const KernelIntegralTable table = config.table_nodes > 0
                                          ? build_table(gp, fn.space, config.table_nodes)
                                          : refine_until_stable(gp, fn.space, config.quad_tol);
    const SobolDecomposition dec = decompose(gp, table);
    const auto predictor = sobol_predictor(gp, table);
    const auto global_mean = sobol_global_mean(gp, table);

    StudyRow row;
    row.n = n;
    row.replicate = rep;
    row.q2 = q2_score(gp, test).q2;
    row.predictor.resize(d);
    row.global_mean.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      row.predictor(i) = predictor[static_cast<std::size_t>(i)].value;
      row.global_mean(i) = global_mean[static_cast<std::size_t>(i)].value;
    }
    row.err_predictor = l2_error(predictor, fn.true_indices);
    row.err_global = l2_error(global_mean, fn.true_indices);

    if (level.has_value()) {
      row.global_std.resize(d);
      row.ci_lower.resize(d);
      row.ci_upper.resize(d);
      row.ci_hit.resize(static_cast<std::size_t>(d));
      for (Eigen::Index i = 0; i < d; ++i) {
        const MainEffectProcess effect =
            build_main_effect(gp, fn.space, table, static_cast<int>(i) + 1, config.sim.n_dis);
        SimulationConfig sim = config.sim;
        sim.seed = mix_seed(work_seed, 100 + static_cast<std::uint64_t>(i));
        const IndexDistribution dist = simulate_index(effect, dec.global.total_variance, sim);
        const ConfidenceInterval ci = dist.confidence_interval(*level);
        row.global_std(i) = dist.std_dev();
        row.ci_lower(i) = ci.lower;
        row.ci_upper(i) = ci.upper;
        row.ci_hit[static_cast<std::size_t>(i)] =
            fn.true_indices(i) >= ci.lower && fn.true_indices(i) <= ci.upper ? 1 : 0;
      }
    }
    result.rows[static_cast<std::size_t>(idx)] = std::move(row);
  });
  return result;
}

// Unique design sizes in first-appearance order with their row indices.
inline std::vector<std::pair<Eigen::Index, std::vector<std::size_t>>> group_by_size(
    const StudyResult& result) {
  std::vector<std::pair<Eigen::Index, std::vector<std::size_t>>> groups;
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    const Eigen::Index n = result.rows[r].n;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [n](const auto& g) { return g.first == n; });
    if (it == groups.end()) {
      groups.push_back({n, {r}});
    } else {
      it->second.push_back(r);
    }
  }
  return groups;
}

inline Eigen::VectorXd collect(const StudyResult& result, const std::vector<std::size_t>& rows,
                               const std::function<double(const StudyRow&)>& get) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    v(static_cast<Eigen::Index>(k)) = get(result.rows[rows[k]]);
  return v;
}

inline double quantile_of(Eigen::VectorXd v, double q) {
  std::sort(v.data(), v.data() + v.size());
  return quantile_sorted(v, q);
}

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path);
  return out;
}

}  // namespace detail

// Learning-size study without simulation: fits, Q2, and both closed-form
// index estimates per replicate.
inline StudyResult convergence_study(const TestFunction& fn, const std::vector<Eigen::Index>& sizes,
                                     int replicates, const StudyConfig& config) {
  if (replicates < 10)
    throw std::invalid_argument("convergence_study: need at least 10 replicates");
  return detail::run_study(fn, sizes, replicates, std::nullopt, config);
}

// Coverage study: adds the simulated index distribution per input and
// records whether the level-CI contains the true index.
inline StudyResult coverage_study(const TestFunction& fn, const std::vector<Eigen::Index>& sizes,
                                  int replicates, double level, const StudyConfig& config) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("coverage_study: level must lie in (0, 1)");
  return detail::run_study(fn, sizes, replicates, level, config);
}

// n, Q2 mean, Q2 std.
inline void write_table1_csv(const std::string& path, const StudyResult& result) {
  auto out = detail::open_csv(path);
  out << "n,q2_mean,q2_std\n";
  for (const auto& [n, rows] : detail::group_by_size(result)) {
    const Eigen::VectorXd q2 =
        detail::collect(result, rows, [](const StudyRow& r) { return r.q2; });
    out << n << ',' << format_full(q2.mean()) << ','
        << format_full(q2.size() > 1 ? stddev_of(q2) : 0.0) << '\n';
  }
}

// Per size and input: mean and 0.05/0.95 quantiles of both approaches.
inline void write_fig_convergence_csv(const std::string& path, const StudyResult& result) {
  auto out = detail::open_csv(path);
  out << "n,q2_mean,input,approach,truth,mean,q05,q95\n";
  for (const auto& [n, rows] : detail::group_by_size(result)) {
    const double q2_mean =
        detail::collect(result, rows, [](const StudyRow& r) { return r.q2; }).mean();
    for (Eigen::Index i = 0; i < result.truth.size(); ++i) {
      for (const bool global : {false, true}) {
        const Eigen::VectorXd values = detail::collect(result, rows, [&](const StudyRow& r) {
          return global ? r.global_mean(i) : r.predictor(i);
        });
        out << n << ',' << format_full(q2_mean) << ',' << (i + 1) << ','
            << (global ? "global_model" : "predictor_only") << ','
            << format_full(result.truth(i)) << ',' << format_full(values.mean()) << ','
            << format_full(detail::quantile_of(values, 0.05)) << ','
            << format_full(detail::quantile_of(values, 0.95)) << '\n';
      }
    }
  }
}

// Per size and input: observed CI coverage.
inline void write_fig_coverage_csv(const std::string& path, const StudyResult& result) {
  if (result.ci_level <= 0.0)
    throw std::invalid_argument("write_fig_coverage_csv: study carries no confidence intervals");
  auto out = detail::open_csv(path);
  out << "n,q2_mean,input,truth,observed_level,level\n";
  for (const auto& [n, rows] : detail::group_by_size(result)) {
    const double q2_mean =
        detail::collect(result, rows, [](const StudyRow& r) { return r.q2; }).mean();
    for (Eigen::Index i = 0; i < result.truth.size(); ++i) {
      const Eigen::VectorXd hits = detail::collect(result, rows, [&](const StudyRow& r) {
        return static_cast<double>(r.ci_hit[static_cast<std::size_t>(i)]);
      });
      out << n << ',' << format_full(q2_mean) << ',' << (i + 1) << ','
          << format_full(result.truth(i)) << ',' << format_full(hits.mean()) << ','
          << format_full(result.ci_level) << '\n';
    }
  }
}

// Per input over all rows: truth, mean approach-2 index, observed coverage.
inline void write_table2_csv(const std::string& path, const StudyResult& result) {
  if (result.ci_level <= 0.0)
    throw std::invalid_argument("write_table2_csv: study carries no confidence intervals");
  auto out = detail::open_csv(path);
  out << "input,truth,mu_mean,observed_level\n";
  std::vector<std::size_t> all(result.rows.size());
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
  for (Eigen::Index i = 0; i < result.truth.size(); ++i) {
    const Eigen::VectorXd mu = detail::collect(result, all, [&](const StudyRow& r) {
      return r.global_mean(i);
    });
    const Eigen::VectorXd hits = detail::collect(result, all, [&](const StudyRow& r) {
      return static_cast<double>(r.ci_hit[static_cast<std::size_t>(i)]);
    });
    out << (i + 1) << ',' << format_full(result.truth(i)) << ',' << format_full(mu.mean()) << ','
        << format_full(hits.mean()) << '\n';
  }
}

}  // namespace gpsobol

#pragma once

// Marginal input distributions (uniform, truncated Weibull, trapezoidal) with
// pdf/cdf/quantile on a bounded support, plus the product input space and its
// JSON schema.  The Weibull marginal is truncated at the 1 - 1e-12 quantile
// and renormalized so every marginal has a finite box; construction verifies
// that the density integrates to one.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gpsobol/common.hpp"
#include "gpsobol/quadrature.hpp"

namespace gpsobol {

namespace detail {

// Rejects unknown keys and reports missing required ones.
inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& required,
                         const std::vector<std::string>& optional, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& key : required)
    if (!j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    bool known = false;
    for (const auto& k : required) known = known || k == key;
    for (const auto& k : optional) known = known || k == key;
    if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

inline double get_number(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) throw ConfigError(where + ": key \"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

}  // namespace detail

class InputDistribution {
 public:
  enum class Kind { uniform, weibull, trapezoidal };

  static InputDistribution uniform(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("uniform: requires a < b");
    InputDistribution d(Kind::uniform);
    d.a_ = a;
    d.b_ = b;
    d.lo_ = a;
    d.hi_ = b;
    d.check_normalization();
    return d;
  }

  static InputDistribution weibull(double shape, double scale, double location = 0.0) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("weibull: shape and scale must be positive");
    InputDistribution d(Kind::weibull);
    d.shape_ = shape;
    d.scale_ = scale;
    d.loc_ = location;
    d.lo_ = location;
    d.hi_ = location + scale * std::pow(-std::log1p(-kPMax), 1.0 / shape);
    d.check_normalization();
    return d;
  }

  static InputDistribution trapezoidal(double a, double b, double c, double d) {
    if (!(a <= b && b <= c && c <= d) || !(d > a))
      throw std::invalid_argument("trapezoidal: requires a <= b <= c <= d with a < d");
    InputDistribution t(Kind::trapezoidal);
    t.a_ = a;
    t.b_ = b;
    t.c_ = c;
    t.d_ = d;
    t.lo_ = a;
    t.hi_ = d;
    t.height_ = 2.0 / ((d - a) + (c - b));
    t.cdf_b_ = t.height_ * (b - a) / 2.0;
    t.cdf_c_ = t.cdf_b_ + t.height_ * (c - b);
    t.check_normalization();
    return t;
  }

  Kind kind() const { return kind_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }

  double pdf(double x) const {
    if (x < lo_ || x > hi_) return 0.0;
    switch (kind_) {
      case Kind::uniform:
        return 1.0 / (b_ - a_);
      case Kind::weibull: {
        const double z = (x - loc_) / scale_;
        const double zk = std::pow(z, shape_);
        return shape_ / scale_ * std::pow(z, shape_ - 1.0) * std::exp(-zk) / kPMax;
      }
      case Kind::trapezoidal:
        if (x < b_) return height_ * (x - a_) / (b_ - a_);
        if (x <= c_) return height_;
        return height_ * (d_ - x) / (d_ - c_);
    }
    return 0.0;
  }

  double cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    switch (kind_) {
      case Kind::uniform:
        return (x - a_) / (b_ - a_);
      case Kind::weibull: {
        const double z = (x - loc_) / scale_;
        return std::min(1.0, -std::expm1(-std::pow(z, shape_)) / kPMax);
      }
      case Kind::trapezoidal:
        if (x < b_) return height_ * (x - a_) * (x - a_) / (2.0 * (b_ - a_));
        if (x <= c_) return cdf_b_ + height_ * (x - b_);
        return 1.0 - height_ * (d_ - x) * (d_ - x) / (2.0 * (d_ - c_));
    }
    return 0.0;
  }

  double quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u outside [0, 1]");
    switch (kind_) {
      case Kind::uniform:
        return a_ + (b_ - a_) * u;
      case Kind::weibull:
        return loc_ + scale_ * std::pow(-std::log1p(-u * kPMax), 1.0 / shape_);
      case Kind::trapezoidal:
        if (u <= cdf_b_ && b_ > a_) return a_ + std::sqrt(2.0 * u * (b_ - a_) / height_);
        if (u <= cdf_c_) return b_ + (u - cdf_b_) / height_;
        return d_ - std::sqrt(std::max(0.0, 2.0 * (1.0 - u) * (d_ - c_) / height_));
    }
    return lo_;
  }

  // Interior probabilities where the quantile map is not smooth (the
  // trapezoid's ramp joints); degenerate joints at 0 or 1 are dropped.
  std::vector<double> probability_breakpoints() const {
    std::vector<double> breaks;
    if (kind_ == Kind::trapezoidal) {
      for (double u : {cdf_b_, cdf_c_})
        if (u > 0.0 && u < 1.0 && (breaks.empty() || u > breaks.back())) breaks.push_back(u);
    }
    return breaks;
  }

  // Raw parameters in declaration order (uniform: a,b; weibull: shape,scale,
  // location; trapezoidal: a,b,c,d).
  std::vector<double> parameters() const {
    switch (kind_) {
      case Kind::uniform:
        return {a_, b_};
      case Kind::weibull:
        return {shape_, scale_, loc_};
      case Kind::trapezoidal:
        return {a_, b_, c_, d_};
    }
    return {};
  }

  static InputDistribution from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"kind"}, {"a", "b", "c", "d", "shape", "scale", "location"},
                         "input distribution");
    const std::string kind = j.at("kind").get<std::string>();
    try {
      if (kind == "uniform") {
        detail::require_keys(j, {"kind", "a", "b"}, {}, "uniform distribution");
        return uniform(detail::get_number(j, "a", kind), detail::get_number(j, "b", kind));
      }
      if (kind == "weibull") {
        detail::require_keys(j, {"kind", "shape", "scale"}, {"location"}, "weibull distribution");
        const double loc = j.contains("location") ? detail::get_number(j, "location", kind) : 0.0;
        return weibull(detail::get_number(j, "shape", kind), detail::get_number(j, "scale", kind),
                       loc);
      }
      if (kind == "trapezoidal") {
        detail::require_keys(j, {"kind", "a", "b", "c", "d"}, {}, "trapezoidal distribution");
        return trapezoidal(detail::get_number(j, "a", kind), detail::get_number(j, "b", kind),
                           detail::get_number(j, "c", kind), detail::get_number(j, "d", kind));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      // Bad parameter values in a config file are schema errors, not
      // runtime failures.
      throw ConfigError(std::string("input distribution: ") + e.what());
    }
    throw ConfigError("input distribution: unknown kind \"" + kind + "\"");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind_) {
      case Kind::uniform:
        j = {{"kind", "uniform"}, {"a", a_}, {"b", b_}};
        break;
      case Kind::weibull:
        j = {{"kind", "weibull"}, {"shape", shape_}, {"scale", scale_}, {"location", loc_}};
        break;
      case Kind::trapezoidal:
        j = {{"kind", "trapezoidal"}, {"a", a_}, {"b", b_}, {"c", c_}, {"d", d_}};
        break;
    }
    return j;
  }

 private:
  static constexpr double kPMax = 1.0 - 1e-12;

  explicit InputDistribution(Kind kind) : kind_(kind) {}

  // The density must integrate to one over [lower, upper] within 1e-10.
  // Each kind gets a quadrature that is exact or spectrally accurate for it:
  // linear segments for the trapezoid, and for the Weibull the substitution
  // t = ((x - loc)/scale)^shape which turns the integrand into e^-t / pmax.
  void check_normalization() const {
    double total = 0.0;
    switch (kind_) {
      case Kind::uniform:
        total = integrate(gauss_legendre_on(a_, b_, 8), [&](double x) { return pdf(x); });
        break;
      case Kind::trapezoidal: {
        const std::array<double, 4> knots = {a_, b_, c_, d_};
        for (int s = 0; s < 3; ++s) {
          if (knots[s + 1] <= knots[s]) continue;
          total += integrate(gauss_legendre_on(knots[s], knots[s + 1], 8),
                             [&](double x) { return pdf(x); });
        }
        break;
      }
      case Kind::weibull: {
        const double t_hi = -std::log1p(-kPMax);
        const int panels = 32;
        for (int s = 0; s < panels; ++s) {
          const double t0 = t_hi * s / panels, t1 = t_hi * (s + 1) / panels;
          total += integrate(gauss_legendre_on(t0, t1, 16), [&](double t) {
            const double x = loc_ + scale_ * std::pow(t, 1.0 / shape_);
            const double dxdt = scale_ / shape_ * std::pow(t, 1.0 / shape_ - 1.0);
            return pdf(x) * dxdt;
          });
        }
        break;
      }
    }
    if (std::abs(total - 1.0) > 1e-10)
      throw std::runtime_error("input distribution: density normalization check failed (integral " +
                               format_full(total) + ")");
  }

  Kind kind_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;  // uniform / trapezoidal knots
  double shape_ = 0.0, scale_ = 0.0, loc_ = 0.0;  // weibull parameters
  double lo_ = 0.0, hi_ = 0.0;
  double height_ = 0.0, cdf_b_ = 0.0, cdf_c_ = 0.0;  // trapezoidal cache
};

// Product measure over independent marginals; dimensions are zero-indexed.
class InputSpace {
 public:
  InputSpace() = default;
  explicit InputSpace(std::vector<InputDistribution> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("InputSpace: needs at least one dimension");
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(dims_.size()); }
  const InputDistribution& marginal(Eigen::Index l) const {
    return dims_.at(static_cast<std::size_t>(l));
  }

  Eigen::VectorXd lower() const {
    Eigen::VectorXd lo(dim());
    for (Eigen::Index l = 0; l < dim(); ++l) lo(l) = dims_[static_cast<std::size_t>(l)].lower();
    return lo;
  }
  Eigen::VectorXd upper() const {
    Eigen::VectorXd hi(dim());
    for (Eigen::Index l = 0; l < dim(); ++l) hi(l) = dims_[static_cast<std::size_t>(l)].upper();
    return hi;
  }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index l = 0; l < dim(); ++l) {
      const auto& m = dims_[static_cast<std::size_t>(l)];
      const double slack = tol * std::max(1.0, m.upper() - m.lower());
      if (x(l) < m.lower() - slack || x(l) > m.upper() + slack) return false;
    }
    return true;
  }

  // Maps a vector of probabilities through the marginal quantiles.
  Eigen::VectorXd quantile(const Eigen::VectorXd& u) const {
    if (u.size() != dim()) throw std::invalid_argument("InputSpace::quantile: dimension mismatch");
    Eigen::VectorXd x(dim());
    for (Eigen::Index l = 0; l < dim(); ++l) x(l) = dims_[static_cast<std::size_t>(l)].quantile(u(l));
    return x;
  }

  static InputSpace from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty())
      throw ConfigError("input space: expected a non-empty JSON array of distributions");
    std::vector<InputDistribution> dims;
    dims.reserve(j.size());
    for (const auto& item : j) dims.push_back(InputDistribution::from_json(item));
    return InputSpace(std::move(dims));
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& d : dims_) j.push_back(d.to_json());
    return j;
  }

 private:
  std::vector<InputDistribution> dims_;
};

// Quadrature rule for integrating against one marginal: Gauss-Legendre in
// probability space mapped through the quantile, so weights sum to one.
// `value_breakpoints` are integrand kinks in value space (a kernel with
// exponent below 2 has one at each design point); panels split there.
//
// Uniform marginals without breakpoints keep a single panel (the quantile is
// affine, so plain Gauss-Legendre is spectrally accurate).  Other marginals
// get a composite rule: panels split at the quantile map's interior joints
// and graded dyadically toward both endpoints, where the map is singular
// (algebraic endpoint behaviour; for the truncated Weibull also the tail
// layer near u = 1 that the truncation squeezes into a tiny probability
// range).
//
// `order_scale` multiplies every panel's order while keeping the panel edges
// of the budget-m rule.  A scale-2 rule therefore shares the scale-1 rule's
// panel structure, so their difference isolates the per-panel truncation
// error; structure-blind successive differences can stall on graded meshes
// whose panel count grows with the budget.
inline QuadratureRule probability_rule(const InputDistribution& dist, int m,
                                       const std::vector<double>& value_breakpoints = {},
                                       int order_scale = 1) {
  std::vector<double> kinks;
  for (double v : value_breakpoints) {
    const double u = dist.cdf(v);
    if (u > 0.0 && u < 1.0) kinks.push_back(u);
  }
  const std::vector<double> joints = dist.probability_breakpoints();
  const bool affine = dist.kind() == InputDistribution::Kind::uniform;
  if (m < 16 || (affine && joints.empty() && kinks.empty())) {
    const int order = m * order_scale;
    const QuadratureRule& base = gauss_legendre_01(order);
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights = base.weights;
    for (int i = 0; i < order; ++i) rule.nodes(i) = dist.quantile(base.nodes(i));
    return rule;
  }

  std::vector<double> edges{0.0, 1.0};
  edges.insert(edges.end(), joints.begin(), joints.end());
  edges.insert(edges.end(), kinks.begin(), kinks.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  // Dyadic ladders toward both endpoints resolve the quantile's boundary
  // behavior (power-law edge, truncation layer).
  const int depth = affine ? 0 : std::min(std::max(2, m / 12), 40);
  if (depth > 0) {
    const double first = edges[1];
    const double last = edges[edges.size() - 2];
    for (int j = 1; j <= depth; ++j) {
      edges.push_back(first * std::ldexp(1.0, -j));
      edges.push_back(1.0 - (1.0 - last) * std::ldexp(1.0, -j));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  // A kink leaves an edge singularity that converges slowly at fixed panel
  // order; a short dyadic zoom toward it from both sides restores fast
  // convergence.
  if (!kinks.empty()) {
    std::vector<double> zoom;
    for (double u : kinks) {
      const auto it = std::lower_bound(edges.begin(), edges.end(), u);
      if (it == edges.end() || *it != u) continue;
      if (it != edges.begin()) {
        double left = *(it - 1);
        for (int j = 0; j < 3; ++j) {
          left = 0.5 * (left + u);
          zoom.push_back(left);
        }
      }
      if (it + 1 != edges.end()) {
        double right = *(it + 1);
        for (int j = 0; j < 3; ++j) {
          right = 0.5 * (u + right);
          zoom.push_back(right);
        }
      }
    }
    // The zoom is a refinement; keep the plain kink panels when it would
    // push the average panel order below three.
    if (static_cast<int>(edges.size() + zoom.size()) - 1 <= m / 3) {
      edges.insert(edges.end(), zoom.begin(), zoom.end());
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
  }
  // More panels than nodes cannot work; retry without the caller's
  // breakpoints (the refinement ladder reaches sizes where they fit).
  if (static_cast<int>(edges.size()) - 1 > m) {
    return probability_rule(dist, m, {}, order_scale);
  }

  const int panels = static_cast<int>(edges.size()) - 1;
  QuadratureRule rule;
  rule.nodes.resize(m * order_scale);
  rule.weights.resize(m * order_scale);
  int at = 0;
  for (int s = 0; s < panels; ++s) {
    const int order = order_scale * (m / panels + (s < m % panels ? 1 : 0));
    const double lo = edges[static_cast<std::size_t>(s)];
    const double len = edges[static_cast<std::size_t>(s) + 1] - lo;
    const QuadratureRule& base = gauss_legendre_01(order);
    for (int i = 0; i < order; ++i, ++at) {
      rule.nodes(at) = dist.quantile(lo + len * base.nodes(i));
      rule.weights(at) = len * base.weights(i);
    }
  }
  return rule;
}

}  // namespace gpsobol

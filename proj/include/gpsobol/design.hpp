#pragma once

// Experimental designs: Latin hypercube sampling (plain and maximin), iid
// sampling, and CSV round-trips for design matrices with optional responses.

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsobol/common.hpp"
#include "gpsobol/distributions.hpp"

namespace gpsobol {

struct Design {
  Eigen::MatrixXd points;     // n x d
  Eigen::VectorXd responses;  // size n, or size 0 when absent

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  bool has_responses() const { return responses.size() > 0; }

  void validate() const {
    if (points.rows() == 0 || points.cols() == 0)
      throw std::invalid_argument("Design: empty point matrix");
    if (has_responses() && responses.size() != points.rows())
      throw std::invalid_argument("Design: responses length does not match point count");
    if (!points.allFinite() || (has_responses() && !responses.allFinite()))
      throw std::invalid_argument("Design: non-finite values");
  }
};

// Stratified unit-cube sample: one point per stratum and dimension, with the
// in-stratum position jittered uniformly.
inline Eigen::MatrixXd lhs_unit(Eigen::Index n, Eigen::Index d, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("lhs_unit: n and d must be positive");
  Eigen::MatrixXd u(n, d);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < d; ++l) {
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    for (Eigen::Index i = 0; i < n; ++i)
      u(i, l) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform01()) /
                static_cast<double>(n);
  }
  return u;
}

// Best of `candidates` random LHS draws under the maximin criterion.
inline Eigen::MatrixXd maximin_lhs_unit(Eigen::Index n, Eigen::Index d, Rng& rng,
                                        int candidates = 24) {
  if (candidates < 1) throw std::invalid_argument("maximin_lhs_unit: candidates must be positive");
  Eigen::MatrixXd best;
  double best_score = -1.0;
  for (int c = 0; c < candidates; ++c) {
    Eigen::MatrixXd u = lhs_unit(n, d, rng);
    double min_sq = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        min_sq = std::min(min_sq, (u.row(i) - u.row(j)).squaredNorm());
    if (n == 1) min_sq = 1.0;
    if (min_sq > best_score) {
      best_score = min_sq;
      best = std::move(u);
    }
  }
  return best;
}

// Latin hypercube in the input space: unit-cube strata mapped through the
// marginal quantiles, so each marginal is stratified in probability.
inline Design lhs_sample(const InputSpace& space, Eigen::Index n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x1b5u));
  Eigen::MatrixXd u = lhs_unit(n, space.dim(), rng);
  Design design;
  design.points.resize(n, space.dim());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = 0; l < space.dim(); ++l)
      design.points(i, l) = space.marginal(l).quantile(u(i, l));
  return design;
}

// Independent draws from the input measure.
inline Eigen::MatrixXd sample_iid(const InputSpace& space, Eigen::Index n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x11du));
  Eigen::MatrixXd x(n, space.dim());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = 0; l < space.dim(); ++l)
      x(i, l) = space.marginal(l).quantile(rng.uniform01());
  return x;
}

inline void write_design_csv(const std::string& path, const Design& design) {
  design.validate();
  std::ofstream out(path);
  if (!out) throw ConfigError("write_design_csv: cannot open " + path);
  for (Eigen::Index l = 0; l < design.dim(); ++l) {
    if (l > 0) out << ',';
    out << 'x' << (l + 1);
  }
  if (design.has_responses()) out << ",y";
  out << '\n';
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    for (Eigen::Index l = 0; l < design.dim(); ++l) {
      if (l > 0) out << ',';
      out << format_full(design.points(i, l));
    }
    if (design.has_responses()) out << ',' << format_full(design.responses(i));
    out << '\n';
  }
  if (!out) throw ConfigError("write_design_csv: write failed for " + path);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError(where + ": cannot parse number \"" + s + "\"");
  return v;
}

}  // namespace detail

// Reads a design written by write_design_csv: header columns x1..xd with an
// optional trailing y column holding responses.
inline Design read_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_design_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("read_design_csv: empty file " + path);
  const auto header = detail::split_csv_line(line);
  if (header.empty()) throw ConfigError("read_design_csv: empty header in " + path);
  const bool has_y = header.back() == "y";
  const std::size_t d = header.size() - (has_y ? 1 : 0);
  if (d == 0) throw ConfigError("read_design_csv: no input columns in " + path);
  for (std::size_t l = 0; l < d; ++l)
    if (header[l] != "x" + std::to_string(l + 1))
      throw ConfigError("read_design_csv: expected column x" + std::to_string(l + 1) + ", found \"" +
                        header[l] + "\" in " + path);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ConfigError("read_design_csv: line " + std::to_string(line_no) + " of " + path +
                        " has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields)
      row.push_back(detail::parse_double(f, path + ":" + std::to_string(line_no)));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("read_design_csv: no data rows in " + path);

  Design design;
  design.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  if (has_y) design.responses.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t l = 0; l < d; ++l)
      design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = rows[i][l];
    if (has_y) design.responses(static_cast<Eigen::Index>(i)) = rows[i][d];
  }
  design.validate();
  return design;
}

}  // namespace gpsobol

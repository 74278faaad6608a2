#pragma once

// Regression trend basis: constant (1) or linear (1, x_1, ..., x_d).

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gpsobol {

enum class TrendKind { constant, linear };

inline const char* trend_name(TrendKind kind) {
  return kind == TrendKind::constant ? "constant" : "linear";
}

inline TrendKind trend_from_name(const std::string& name) {
  if (name == "constant") return TrendKind::constant;
  if (name == "linear") return TrendKind::linear;
  throw std::invalid_argument("unknown trend kind \"" + name + "\"");
}

class TrendBasis {
 public:
  TrendBasis(TrendKind kind, Eigen::Index dim) : kind_(kind), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("TrendBasis: dimension must be positive");
  }

  TrendKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index size() const { return kind_ == TrendKind::constant ? 1 : dim_ + 1; }

  Eigen::RowVectorXd row(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("TrendBasis::row: dimension mismatch");
    Eigen::RowVectorXd f(size());
    f(0) = 1.0;
    if (kind_ == TrendKind::linear) f.tail(dim_) = x.transpose();
    return f;
  }

  // n x size basis matrix for a set of points (rows).
  Eigen::MatrixXd matrix(const Eigen::MatrixXd& points) const {
    if (points.cols() != dim_) throw std::invalid_argument("TrendBasis::matrix: dimension mismatch");
    Eigen::MatrixXd f(points.rows(), size());
    f.col(0).setOnes();
    if (kind_ == TrendKind::linear) f.rightCols(dim_) = points;
    return f;
  }

 private:
  TrendKind kind_;
  Eigen::Index dim_;
};

}  // namespace gpsobol

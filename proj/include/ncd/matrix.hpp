#ifndef NCD_MATRIX_HPP
#define NCD_MATRIX_HPP

#include <cassert>
#include <span>
#include <string>
#include <vector>

#include "ncd/rng.hpp"

namespace ncd {

// Dense row-major matrix of 64-bit floats. Constructors and fill() reject
// NaN/Inf; element writes on hot paths are unchecked.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  Matrix(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }
  std::span<const double> row_span(int r) const {
    return {row(r), static_cast<std::size_t>(cols_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double value);
  void zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);

// Logistic function and friends. log_sigmoid is the numerically stable
// evaluation of ln(1/(1+e^-x)).
double sigmoid(double x);
Matrix sigmoid(const Matrix& m);
double log_sigmoid(double x);
double logit(double p);

// (n_out x n_in) weight matrix drawn from N(0, std^2) with
// std = sqrt(2/(n_in+n_out)): n_in neurons feed the weights, n_out receive
// the result.
Matrix xavier_init(int n_in, int n_out, Rng& rng);

}  // namespace ncd

#endif  // NCD_MATRIX_HPP

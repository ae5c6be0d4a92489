#include "ncd/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "ncd/errors.hpp"

namespace ncd {

namespace {

void require_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(what) + ": non-finite entry");
    }
  }
}

}  // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ValidationError("Matrix: negative dimension");
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows < 0 || cols < 0) throw ValidationError("Matrix: negative dimension");
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ValidationError("Matrix: data length does not match rows*cols");
  }
  require_finite(data_, "Matrix");
}

void Matrix::fill(double value) {
  if (!std::isfinite(value)) throw ValidationError("Matrix::fill: non-finite value");
  std::fill(data_.begin(), data_.end(), value);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      double* orow = out.row(i);
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix sigmoid(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = sigmoid(m.data()[i]);
  return out;
}

double log_sigmoid(double x) {
  // ln(1/(1+e^-x)) without overflow on either tail.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("logit: argument outside (0,1)");
  return std::log(p / (1.0 - p));
}

Matrix xavier_init(int n_in, int n_out, Rng& rng) {
  if (n_in < 1 || n_out < 1) throw ValidationError("xavier_init: fan counts must be >= 1");
  double stddev = std::sqrt(2.0 / (n_in + n_out));
  Matrix out(n_out, n_in);
  for (double& v : out.data()) v = rng.normal(0.0, stddev);
  return out;
}

}  // namespace ncd

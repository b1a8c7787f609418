#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gzsl/error.hpp"

namespace gzsl {

// Dense column-major matrix of doubles. Datapoints are stored one per
// column throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }

  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Column-wise concatenation [a | b].
inline Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  require(a.rows() == b.rows(), Errc::dimension_mismatch,
          "hcat: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    auto src = a.col(c);
    auto dst = out.col(c);
    for (std::size_t r = 0; r < a.rows(); ++r) dst[r] = src[r];
  }
  for (std::size_t c = 0; c < b.cols(); ++c) {
    auto src = b.col(c);
    auto dst = out.col(a.cols() + c);
    for (std::size_t r = 0; r < b.rows(); ++r) dst[r] = src[r];
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::dimension_mismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace gzsl

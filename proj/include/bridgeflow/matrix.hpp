#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bridgeflow {

using Vector = std::vector<double>;

// Dense row-major matrix. Sizes in this library stay in the hundreds, so
// everything is stored contiguously and handed to the kernels as raw rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  const double* data() const noexcept { return data_.data(); }
  double* data() noexcept { return data_.data(); }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);

// y = M x and y = M^T x through the active SIMD kernels.
Vector product(const Matrix& m, std::span<const double> x);
Vector transposed_product(const Matrix& m, std::span<const double> x);

double max_abs_difference(const Matrix& a, const Matrix& b);
double max_abs_difference(std::span<const double> a, std::span<const double> b);

}  // namespace bridgeflow

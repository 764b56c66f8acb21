#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latentdyn/trajectory.hpp"

namespace latentdyn {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& data() const noexcept { return data_; }

  Matrix transposed() const;
  std::vector<double> apply(std::span<const double> x) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

/// Eigenpairs of a symmetric matrix, eigenvalues descending; vectors(:, i) pairs with values[i].
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Householder tridiagonalization followed by implicit-shift QL. If QL fails
/// to converge and n <= 64 the cyclic Jacobi method is used instead.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Cyclic Jacobi rotations; the fallback path of symmetric_eigen.
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-14, int max_sweeps = 100);

std::vector<double> column_mean(const Trajectory& t);
/// Sample covariance with divisor N - 1.
Matrix covariance(const Trajectory& t, std::span<const double> mean);

struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // k x d, orthonormal rows
  std::vector<double> eigenvalues;

  std::size_t rank() const noexcept { return components.rows(); }
};

/// Top-k principal axes of the sample covariance.
///
/// Uses the N x N Gram matrix when N < d. Each component is oriented so its
/// entry of largest magnitude is positive.
PcaModel fit_pca(const Trajectory& t, std::size_t k);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Z_n = components[0..2] * (A_n - mean). Requires a model with k >= 2.
std::vector<Point2> project(const PcaModel& m, const Trajectory& t);

/// Scores on the first `axes` components, as an N x axes trajectory.
Trajectory project_onto(const PcaModel& m, const Trajectory& t, std::size_t axes);

}  // namespace latentdyn

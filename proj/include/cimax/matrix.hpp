#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace cimax {

// Thrown when a matrix that must be symmetric positive definite is not:
// a Cholesky pivot fell at or below the configured floor.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles.
//
// The zero-fill constructor is the cheap one used by kernels. Constructors
// that accept caller data validate that every entry is finite, so matrices
// built from files or literals cannot smuggle NaN/Inf into the numerics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  Matrix(int rows, int cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  bool empty() const { return data_.empty(); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Fixed-length vector of doubles; the data constructor rejects non-finite
// entries for the same reason as Matrix.
class Vector {
 public:
  Vector() = default;
  explicit Vector(int n);
  explicit Vector(std::vector<double> values);
  Vector(std::initializer_list<double> values);

  int size() const { return static_cast<int>(data_.size()); }
  double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::vector<double> data_;
};

// ======================= elementwise and shape ops =======================

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);

bool same_values(const Matrix& a, const Matrix& b);  // exact comparison

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double norm2(const Vector& v);

Matrix transpose(const Matrix& a);

// (a + a^T) / 2; a must be square.
Matrix symmetrize(const Matrix& a);

// a + eps * I; a must be square.
Matrix add_scaled_identity(const Matrix& a, double eps);

// ============================ dense kernels ==============================
// OpenMP-parallel over independent output rows; every output element is
// accumulated in a fixed serial order, so results do not depend on the
// thread count. Serial counterparts live in cimax::ref for tests and the
// kernel benchmark.

// c = a b
Matrix matmul(const Matrix& a, const Matrix& b);

// (z - mu 1^T)(z - mu 1^T)^T / n  for z with samples as columns.
Matrix centered_gram(const Matrix& z, const Vector& mu);

// (z1 - mu1 1^T)(z2 - mu2 1^T)^T / n
Matrix centered_cross_gram(const Matrix& z1, const Vector& mu1,
                           const Matrix& z2, const Vector& mu2);

// Mean of the columns of z.
Vector column_mean(const Matrix& z);

}  // namespace cimax

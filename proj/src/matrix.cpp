#include "cimax/matrix.hpp"

#include <cmath>
#include <string>

namespace cimax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::string shape_of(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_all_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

}  // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  require(rows >= 0 && cols >= 0, "Matrix: negative dimension");
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(rows >= 0 && cols >= 0, "Matrix: negative dimension");
  require(data_.size() == static_cast<std::size_t>(rows) * cols,
          "Matrix: data length " + std::to_string(data_.size()) +
              " does not match shape " + shape_of(*this));
  require_all_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == cols_, "Matrix: ragged rows");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  require_all_finite(data_, "Matrix");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector::Vector(int n) {
  if (n < 0) throw std::invalid_argument("Vector: negative length");
  data_.assign(static_cast<std::size_t>(n), 0.0);
}

Vector::Vector(std::vector<double> values) : data_(std::move(values)) {
  require_all_finite(data_, "Vector");
}

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  require_all_finite(data_, "Vector");
}

// ======================= elementwise and shape ops =======================

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + shape_of(a) + " vs " +
              shape_of(b));
}

}  // namespace

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = s * a.data()[i];
  return c;
}

Vector operator+(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "operator+: vector length mismatch");
  Vector c(a.size());
  for (int i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vector operator-(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "operator-: vector length mismatch");
  Vector c(a.size());
  for (int i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vector operator*(double s, const Vector& a) {
  Vector c(a.size());
  for (int i = 0; i < a.size(); ++i) c[i] = s * a[i];
  return c;
}

bool same_values(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.data()[i] != b.data()[i]) return false;
  }
  return true;
}

double trace(const Matrix& a) {
  require(a.rows() == a.cols(), "trace: matrix not square");
  double t = 0.0;
  for (int i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

double norm2(const Vector& v) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix symmetrize(const Matrix& a) {
  require(a.rows() == a.cols(), "symmetrize: matrix not square");
  Matrix s(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  }
  return s;
}

Matrix add_scaled_identity(const Matrix& a, double eps) {
  require(a.rows() == a.cols(), "add_scaled_identity: matrix not square");
  Matrix s = a;
  for (int i = 0; i < a.rows(); ++i) s(i, i) += eps;
  return s;
}

// ============================ dense kernels ==============================

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(),
          "matmul: inner dimensions differ, " + shape_of(a) + " * " + shape_of(b));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(m, n);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) \
    if (static_cast<long long>(m) * k * n > 32768)
  for (int i = 0; i < m; ++i) {
    double* ci = pc + static_cast<std::size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const double ail = pa[static_cast<std::size_t>(i) * k + l];
      const double* bl = pb + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix centered_gram(const Matrix& z, const Vector& mu) {
  return centered_cross_gram(z, mu, z, mu);
}

Matrix centered_cross_gram(const Matrix& z1, const Vector& mu1,
                           const Matrix& z2, const Vector& mu2) {
  require(z1.cols() == z2.cols(),
          "centered_cross_gram: sample counts differ, " + shape_of(z1) +
              " vs " + shape_of(z2));
  require(mu1.size() == z1.rows() && mu2.size() == z2.rows(),
          "centered_cross_gram: mean length does not match rows");
  require(z1.cols() > 0, "centered_cross_gram: no samples");
  const int p = z1.rows(), q = z2.rows(), n = z1.cols();
  Matrix g(p, q);
#pragma omp parallel for schedule(static) \
    if (static_cast<long long>(p) * q * n > 32768)
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) {
        s += (z1(i, t) - mu1[i]) * (z2(j, t) - mu2[j]);
      }
      g(i, j) = s / n;
    }
  }
  return g;
}

Vector column_mean(const Matrix& z) {
  require(z.cols() > 0, "column_mean: no columns");
  Vector mu(z.rows());
  for (int i = 0; i < z.rows(); ++i) {
    double s = 0.0;
    for (int t = 0; t < z.cols(); ++t) s += z(i, t);
    mu[i] = s / z.cols();
  }
  return mu;
}

}  // namespace cimax

#include "cimax/ref.hpp"

#include <stdexcept>

namespace cimax::ref {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("ref::matmul: inner dimensions differ");
  }
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix centered_cross_gram(const Matrix& z1, const Vector& mu1,
                           const Matrix& z2, const Vector& mu2) {
  if (z1.cols() != z2.cols() || z1.cols() == 0) {
    throw std::invalid_argument("ref::centered_cross_gram: bad sample count");
  }
  if (mu1.size() != z1.rows() || mu2.size() != z2.rows()) {
    throw std::invalid_argument("ref::centered_cross_gram: bad mean length");
  }
  Matrix g(z1.rows(), z2.rows());
  for (int i = 0; i < z1.rows(); ++i) {
    for (int j = 0; j < z2.rows(); ++j) {
      double s = 0.0;
      for (int t = 0; t < z1.cols(); ++t) {
        s += (z1(i, t) - mu1[i]) * (z2(j, t) - mu2[j]);
      }
      g(i, j) = s / z1.cols();
    }
  }
  return g;
}

}  // namespace cimax::ref

#include "cimax/infomeasures.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cimax/linalg.hpp"

namespace cimax {
namespace {

constexpr double kLog2PiE = 1.8378770664093453 + 1.0;  // log(2 pi) + 1

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_symmetric(const Matrix& a, const char* name) {
  require(a.rows() == a.cols(), std::string(name) + ": not square");
  const double tol = 1e-9 * std::max(1.0, max_abs(a));
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i + 1; j < a.cols(); ++j) {
      require(std::abs(a(i, j) - a(j, i)) <= tol,
              std::string(name) + ": not symmetric");
    }
  }
}

}  // namespace

SecondOrderPair::SecondOrderPair(unchecked_t, Matrix r_x, Matrix r_y,
                                 Matrix r_xy, Vector mu_x, Vector mu_y)
    : r_x_(std::move(r_x)),
      r_y_(std::move(r_y)),
      r_xy_(std::move(r_xy)),
      mu_x_(std::move(mu_x)),
      mu_y_(std::move(mu_y)) {
  require(r_x_.rows() == r_x_.cols() && r_y_.rows() == r_y_.cols(),
          "SecondOrderPair: auto-covariance blocks must be square");
  require(r_xy_.rows() == r_x_.rows() && r_xy_.cols() == r_y_.rows(),
          "SecondOrderPair: cross block is " + std::to_string(r_xy_.rows()) +
              "x" + std::to_string(r_xy_.cols()) + ", expected " +
              std::to_string(r_x_.rows()) + "x" + std::to_string(r_y_.rows()));
  require(mu_x_.size() == r_x_.rows() && mu_y_.size() == r_y_.rows(),
          "SecondOrderPair: mean length does not match covariance");
}

SecondOrderPair::SecondOrderPair(Matrix r_x, Matrix r_y, Matrix r_xy,
                                 Vector mu_x, Vector mu_y)
    : SecondOrderPair(unchecked, std::move(r_x), std::move(r_y),
                      std::move(r_xy), std::move(mu_x), std::move(mu_y)) {
  require_symmetric(r_x_, "SecondOrderPair r_x");
  require_symmetric(r_y_, "SecondOrderPair r_y");
  const auto eig = sym_eigenvalues(joint_covariance(*this));
  if (eig.back() < -1e-9) {
    throw std::invalid_argument(
        "SecondOrderPair: joint covariance is not positive semidefinite "
        "(smallest eigenvalue " +
        std::to_string(eig.back()) + ")");
  }
}

SecondOrderPair SecondOrderPair::swapped() const {
  return SecondOrderPair(unchecked, r_y_, r_x_, transpose(r_xy_), mu_y_,
                         mu_x_);
}

Matrix joint_covariance(const SecondOrderPair& pair) {
  const int p = pair.dim_x(), q = pair.dim_y();
  Matrix joint(p + q, p + q);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) joint(i, j) = pair.r_x()(i, j);
    for (int j = 0; j < q; ++j) joint(i, p + j) = pair.r_xy()(i, j);
  }
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < p; ++j) joint(p + i, j) = pair.r_xy()(j, i);
    for (int j = 0; j < q; ++j) joint(p + i, p + j) = pair.r_y()(i, j);
  }
  return joint;
}

double ld_entropy(const Matrix& r, double eps) {
  return 0.5 * logdet_spd(add_scaled_identity(r, eps)) +
         0.5 * r.rows() * kLog2PiE;
}

Matrix residual_covariance(const SecondOrderPair& pair, double eps) {
  // W = (r_y + eps I)^-1 r_xy^T, residual = r_x - r_xy W.
  const Matrix w =
      solve_spd(add_scaled_identity(pair.r_y(), eps), transpose(pair.r_xy()));
  return symmetrize(pair.r_x() - matmul(pair.r_xy(), w));
}

double conditional_ld_entropy(const SecondOrderPair& pair, double eps) {
  return ld_entropy(residual_covariance(pair, eps), eps);
}

AffineEstimator affine_mmse(const SecondOrderPair& pair, double eps) {
  // gain = r_xy (r_y + eps I)^-1, taken as the transpose of a solve.
  const Matrix gain = transpose(
      solve_spd(add_scaled_identity(pair.r_y(), eps), transpose(pair.r_xy())));
  Vector offset(pair.dim_x());
  for (int i = 0; i < pair.dim_x(); ++i) {
    double s = pair.mu_x()[i];
    for (int j = 0; j < pair.dim_y(); ++j) s -= gain(i, j) * pair.mu_y()[j];
    offset[i] = s;
  }
  return {gain, offset};
}

double ldmi(const SecondOrderPair& pair, double eps) {
  return ld_entropy(pair.r_x(), eps) - conditional_ld_entropy(pair, eps);
}

double ldmi_symmetric(const SecondOrderPair& pair, double eps) {
  return 0.5 * (ldmi(pair, eps) + ldmi(pair.swapped(), eps));
}

}  // namespace cimax

#pragma once

#include "cimax/matrix.hpp"

namespace cimax {

// Second-order description of a pair of random vectors x (dim p) and
// y (dim q): auto-covariances, cross-covariance, and means.
//
// The checked constructor validates shapes, symmetry of the auto-covariance
// blocks (1e-9 relative) and positive semidefiniteness of the assembled
// joint covariance (eigenvalues above -1e-9). A pair failing those checks is
// a broken input, and a negative mutual information downstream should point
// at the input, not at the formulas.
class SecondOrderPair {
 public:
  SecondOrderPair(Matrix r_x, Matrix r_y, Matrix r_xy, Vector mu_x,
                  Vector mu_y);

  // Tag for callers whose statistics are positive semidefinite by
  // construction (the covariance tracker updates them jointly); skips the
  // eigenvalue check, keeps the cheap shape checks.
  struct unchecked_t {};
  static constexpr unchecked_t unchecked{};
  SecondOrderPair(unchecked_t, Matrix r_x, Matrix r_y, Matrix r_xy,
                  Vector mu_x, Vector mu_y);

  int dim_x() const { return r_x_.rows(); }
  int dim_y() const { return r_y_.rows(); }
  const Matrix& r_x() const { return r_x_; }
  const Matrix& r_y() const { return r_y_; }
  const Matrix& r_xy() const { return r_xy_; }
  const Vector& mu_x() const { return mu_x_; }
  const Vector& mu_y() const { return mu_y_; }

  // Same statistics with the roles of x and y exchanged.
  SecondOrderPair swapped() const;

 private:
  Matrix r_x_, r_y_, r_xy_;
  Vector mu_x_, mu_y_;
};

// Block matrix [[r_x, r_xy], [r_xy^T, r_y]].
Matrix joint_covariance(const SecondOrderPair& pair);

// Log-determinant entropy of a vector with covariance r:
//   0.5 * logdet(r + eps I) + (dim / 2) * log(2 pi e).
double ld_entropy(const Matrix& r, double eps);

// Error covariance of the best affine estimate of x from y:
//   r_x - r_xy (r_y + eps I)^-1 r_xy^T.
Matrix residual_covariance(const SecondOrderPair& pair, double eps);

// Entropy of x after conditioning on y: the LD entropy of the residual.
double conditional_ld_entropy(const SecondOrderPair& pair, double eps);

// Coefficients of the affine estimate itself: xhat = gain * y + offset.
struct AffineEstimator {
  Matrix gain;
  Vector offset;
};
AffineEstimator affine_mmse(const SecondOrderPair& pair, double eps);

// Log-determinant mutual information, the entropy drop from conditioning:
//   0.5 * [logdet(r_x + eps I) - logdet(residual_x + eps I)].
double ldmi(const SecondOrderPair& pair, double eps);

// Symmetrized form, the average of both conditioning directions:
//   0.25 * [logdet(r_x + eps I) + logdet(r_y + eps I)
//           - logdet(residual_x + eps I) - logdet(residual_y + eps I)].
// Nonnegative for any PSD pair, zero exactly when r_xy = 0.
double ldmi_symmetric(const SecondOrderPair& pair, double eps);

}  // namespace cimax

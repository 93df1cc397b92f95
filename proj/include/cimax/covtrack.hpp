#pragma once

#include "cimax/matrix.hpp"

namespace cimax {

// Exponentially weighted second-order statistics of the two projector
// branches. r1, r2 track the per-branch covariances, r12 the cross block,
// mu1, mu2 the means. Fresh state starts at identity covariances, zero
// cross block, zero means.
struct CovarianceState {
  Matrix r1, r2, r12;
  Vector mu1, mu2;

  int dim() const { return r1.rows(); }
};

CovarianceState init_state(int dim);

// A pair of projector output batches with samples as columns. Construction
// checks matching shapes, at least one sample, and finiteness.
struct Batch {
  Batch(Matrix z1_in, Matrix z2_in);

  Matrix z1, z2;

  int dim() const { return z1.rows(); }
  int count() const { return z1.cols(); }
};

// lambda * mu_prev + (1 - lambda) * column mean of z.
Vector updated_mean(const Vector& mu_prev, const Matrix& z, double lambda);

// z - mu 1^T.
Matrix centered(const Matrix& z, const Vector& mu);

// lambda * r_prev + (1 - lambda) * (1/n)(z - mu 1^T)(z - mu 1^T)^T,
// symmetrized. mu is the already-updated mean of the same step.
Matrix updated_autocov(const Matrix& r_prev, const Matrix& z, const Vector& mu,
                       double lambda);

// Cross-covariance analogue; no symmetrization, the block is rectangularly
// shaped in general.
Matrix updated_crosscov(const Matrix& r12_prev, const Matrix& z1,
                        const Vector& mu1, const Matrix& z2, const Vector& mu2,
                        double lambda);

// One recursion step over a batch: means first, then both auto blocks and
// the cross block, all centered with the updated means. lambda must lie in
// [0, 1); 1 would freeze the state forever.
CovarianceState batch_update(const CovarianceState& state, const Batch& batch,
                             double lambda);

}  // namespace cimax

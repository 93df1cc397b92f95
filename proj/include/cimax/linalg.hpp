#pragma once

#include <vector>

#include "cimax/matrix.hpp"

namespace cimax {

struct CholeskyOptions {
  // A pivot at or below this value aborts the factorization.
  double pivot_floor = 0.0;
};

// Lower-triangular L with a = L L^T. Reads the lower triangle of a.
// Throws NotPositiveDefinite naming the offending pivot index.
Matrix cholesky(const Matrix& a, const CholeskyOptions& opts = {});

// log det(a) for symmetric positive definite a: 2 * sum_i log L_ii.
double logdet_spd(const Matrix& a);

// logdet_spd(a + shift I) where shift starts at eps and is multiplied by 10
// on each NotPositiveDefinite, at most max_steps times; the shift that
// succeeded is written to *shift_used when non-null. This escalation path is
// for the training loop; everything else uses the fail-fast primitives.
double logdet_spd_jittered(const Matrix& a, double eps, int max_steps,
                           double* shift_used);

// Solve a x = b for symmetric positive definite a.
Matrix solve_spd(const Matrix& a, const Matrix& b);
Vector solve_spd(const Matrix& a, const Vector& b);

Matrix inverse_spd(const Matrix& a);

// Eigenvalues of a symmetric matrix in descending order, by the cyclic
// Jacobi method. Sweeps run until the off-diagonal Frobenius norm falls
// below 1e-12 * ||a||_F. Inputs asymmetric beyond 1e-9 relative tolerance
// are rejected.
std::vector<double> sym_eigenvalues(const Matrix& a);

// exp of the entropy of the eigenvalue distribution: P for a flat spectrum,
// 1 for rank one. Tiny negative rounding artifacts carry no mass; an
// all-zero spectrum reports 1.
double effective_rank(const std::vector<double>& eigenvalues);

}  // namespace cimax

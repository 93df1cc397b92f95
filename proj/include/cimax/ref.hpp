#pragma once

#include "cimax/matrix.hpp"

// Serial reference kernels. Plain loops, no OpenMP, no reordering tricks.
// Tests treat these as oracles for the parallel kernels and the benchmark
// measures the two side by side.
namespace cimax::ref {

Matrix matmul(const Matrix& a, const Matrix& b);

Matrix centered_cross_gram(const Matrix& z1, const Vector& mu1,
                           const Matrix& z2, const Vector& mu2);

}  // namespace cimax::ref

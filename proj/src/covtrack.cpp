#include "cimax/covtrack.hpp"

#include <cmath>
#include <string>

namespace cimax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_lambda(double lambda) {
  require(lambda >= 0.0 && lambda < 1.0,
          "forgetting factor must lie in [0, 1), got " +
              std::to_string(lambda));
}

}  // namespace

CovarianceState init_state(int dim) {
  require(dim > 0, "init_state: dimension must be positive");
  CovarianceState s;
  s.r1 = Matrix::identity(dim);
  s.r2 = Matrix::identity(dim);
  s.r12 = Matrix(dim, dim);
  s.mu1 = Vector(dim);
  s.mu2 = Vector(dim);
  return s;
}

Batch::Batch(Matrix z1_in, Matrix z2_in)
    : z1(std::move(z1_in)), z2(std::move(z2_in)) {
  require(z1.rows() == z2.rows() && z1.cols() == z2.cols(),
          "Batch: branch shapes differ");
  require(z1.cols() > 0, "Batch: no samples");
  for (std::size_t i = 0; i < z1.size(); ++i) {
    require(std::isfinite(z1.data()[i]) && std::isfinite(z2.data()[i]),
            "Batch: non-finite projector output");
  }
}

Vector updated_mean(const Vector& mu_prev, const Matrix& z, double lambda) {
  require_lambda(lambda);
  require(mu_prev.size() == z.rows(), "updated_mean: length mismatch");
  return lambda * mu_prev + (1.0 - lambda) * column_mean(z);
}

Matrix centered(const Matrix& z, const Vector& mu) {
  require(mu.size() == z.rows(), "centered: length mismatch");
  Matrix c(z.rows(), z.cols());
  for (int i = 0; i < z.rows(); ++i) {
    for (int t = 0; t < z.cols(); ++t) c(i, t) = z(i, t) - mu[i];
  }
  return c;
}

Matrix updated_autocov(const Matrix& r_prev, const Matrix& z, const Vector& mu,
                       double lambda) {
  require_lambda(lambda);
  require(r_prev.rows() == z.rows() && r_prev.cols() == z.rows(),
          "updated_autocov: shape mismatch");
  return symmetrize(lambda * r_prev +
                    (1.0 - lambda) * centered_gram(z, mu));
}

Matrix updated_crosscov(const Matrix& r12_prev, const Matrix& z1,
                        const Vector& mu1, const Matrix& z2, const Vector& mu2,
                        double lambda) {
  require_lambda(lambda);
  require(r12_prev.rows() == z1.rows() && r12_prev.cols() == z2.rows(),
          "updated_crosscov: shape mismatch");
  return lambda * r12_prev +
         (1.0 - lambda) * centered_cross_gram(z1, mu1, z2, mu2);
}

CovarianceState batch_update(const CovarianceState& state, const Batch& batch,
                             double lambda) {
  require(state.dim() == batch.dim(),
          "batch_update: state dim " + std::to_string(state.dim()) +
              " vs batch dim " + std::to_string(batch.dim()));
  CovarianceState next;
  next.mu1 = updated_mean(state.mu1, batch.z1, lambda);
  next.mu2 = updated_mean(state.mu2, batch.z2, lambda);
  next.r1 = updated_autocov(state.r1, batch.z1, next.mu1, lambda);
  next.r2 = updated_autocov(state.r2, batch.z2, next.mu2, lambda);
  next.r12 = updated_crosscov(state.r12, batch.z1, next.mu1, batch.z2,
                              next.mu2, lambda);
  return next;
}

}  // namespace cimax

#include "cimax/loss.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "cimax/infomeasures.hpp"
#include "cimax/linalg.hpp"

namespace cimax {
namespace {

void validate(const LossParams& p) {
  if (!(p.eps > 0.0)) {
    throw std::invalid_argument("LossParams: eps must be positive");
  }
  if (!(p.alpha >= 0.0)) {
    throw std::invalid_argument("LossParams: alpha must be nonnegative");
  }
  if (!(p.lambda >= 0.0 && p.lambda < 1.0)) {
    throw std::invalid_argument("LossParams: lambda must lie in [0, 1)");
  }
}

double attraction_term(const Batch& batch) {
  double ss = 0.0;
  for (std::size_t i = 0; i < batch.z1.size(); ++i) {
    const double d = batch.z1.data()[i] - batch.z2.data()[i];
    ss += d * d;
  }
  return ss / (static_cast<double>(batch.count()) * batch.dim());
}

// Loss value and tracked-state bookkeeping for an already-advanced state.
LossBreakdown breakdown_for(const CovarianceState& next, const Batch& batch,
                            const LossParams& params, double* shift1,
                            double* shift2) {
  LossBreakdown b;
  b.eps_used = params.eps;
  *shift1 = *shift2 = params.eps;
  if (params.bigbang_enabled) {
    const double div = params.dim_normalize ? batch.dim() : 1.0;
    const double ld1 = logdet_spd_jittered(next.r1, params.eps, 3, shift1);
    const double ld2 = logdet_spd_jittered(next.r2, params.eps, 3, shift2);
    b.big_bang = -(ld1 + ld2) / div;
    b.eps_used = std::max(*shift1, *shift2);
    if (b.eps_used > params.eps) {
      std::cerr << "[loss] logdet shift escalated from " << params.eps
                << " to " << b.eps_used << "\n";
    }
  }
  b.attraction = attraction_term(batch);
  b.total = b.big_bang + params.alpha * b.attraction;
  // The step's effective shift also regularizes the diagnostic, so a jitter
  // rescue never leaves the breakdown half-computed.
  b.ldmi_tracked = ldmi_symmetric(
      SecondOrderPair(SecondOrderPair::unchecked, next.r1, next.r2, next.r12,
                      next.mu1, next.mu2),
      b.eps_used);
  return b;
}

// Gradients for an already-advanced state, with explicit per-branch logdet
// shifts so a jittered objective and its gradient stay consistent.
BranchGradients grads_for(const CovarianceState& next, const Batch& batch,
                          const LossParams& params, double shift1,
                          double shift2) {
  const int p = batch.dim(), n = batch.count();
  BranchGradients g{Matrix(p, n), Matrix(p, n)};

  if (params.bigbang_enabled) {
    const double div = params.dim_normalize ? p : 1.0;
    const double factor =
        (params.bigbang_grad == BigBangGrad::exact ? 2.0 : 1.0) *
        (1.0 - params.lambda) / n;
    const double scale = -factor / div;
    const Matrix d1 = solve_spd(add_scaled_identity(next.r1, shift1),
                                centered(batch.z1, next.mu1));
    const Matrix d2 = solve_spd(add_scaled_identity(next.r2, shift2),
                                centered(batch.z2, next.mu2));
    g.g1 = scale * d1;
    g.g2 = scale * d2;
  }

  const double a = 2.0 * params.alpha / (static_cast<double>(n) * p);
  for (std::size_t i = 0; i < g.g1.size(); ++i) {
    const double diff = batch.z1.data()[i] - batch.z2.data()[i];
    g.g1.data()[i] += a * diff;
    g.g2.data()[i] -= a * diff;
  }
  return g;
}

}  // namespace

ObjectiveResult objective(const CovarianceState& state, const Batch& batch,
                          const LossParams& params) {
  validate(params);
  CovarianceState next = batch_update(state, batch, params.lambda);
  double shift1, shift2;
  LossBreakdown b = breakdown_for(next, batch, params, &shift1, &shift2);
  return {b, std::move(next)};
}

BranchGradients grad_z(const CovarianceState& state, const Batch& batch,
                       const LossParams& params) {
  validate(params);
  const CovarianceState next = batch_update(state, batch, params.lambda);
  return grads_for(next, batch, params, params.eps, params.eps);
}

StepResult objective_and_grad(const CovarianceState& state, const Batch& batch,
                              const LossParams& params) {
  validate(params);
  CovarianceState next = batch_update(state, batch, params.lambda);
  double shift1, shift2;
  LossBreakdown b = breakdown_for(next, batch, params, &shift1, &shift2);
  BranchGradients g = grads_for(next, batch, params, shift1, shift2);
  return {b, std::move(next), std::move(g)};
}

// ===================== finite-difference oracle ==========================
// Everything below is written against the loss definition directly: plain
// loops, no covtrack or kernel calls, so a defect in those paths cannot
// cancel out of the comparison.

namespace {

std::vector<double> fd_mean(const Matrix& z) {
  std::vector<double> m(static_cast<std::size_t>(z.rows()), 0.0);
  for (int i = 0; i < z.rows(); ++i) {
    for (int t = 0; t < z.cols(); ++t) m[static_cast<std::size_t>(i)] += z(i, t);
    m[static_cast<std::size_t>(i)] /= z.cols();
  }
  return m;
}

}  // namespace

BranchGradients grad_z_fd(const CovarianceState& state, const Batch& batch,
                          const LossParams& params, const FdOptions& opts) {
  validate(params);
  if (!(opts.step > 0.0)) {
    throw std::invalid_argument("grad_z_fd: step must be positive");
  }
  const int p = batch.dim(), n = batch.count();
  const double lambda = params.lambda;

  // Means of the unperturbed batch, used when means are frozen.
  const auto base_mean1 = fd_mean(batch.z1);
  const auto base_mean2 = fd_mean(batch.z2);

  // Total loss at (z1, z2) from first principles.
  auto loss_at = [&](const Matrix& z1, const Matrix& z2) -> double {
    double big_bang = 0.0;
    if (params.bigbang_enabled) {
      const Matrix* zs[2] = {&z1, &z2};
      const Matrix* rs[2] = {&state.r1, &state.r2};
      const Vector* mus[2] = {&state.mu1, &state.mu2};
      const std::vector<double>* frozen[2] = {&base_mean1, &base_mean2};
      double lds = 0.0;
      for (int b = 0; b < 2; ++b) {
        const Matrix& z = *zs[b];
        std::vector<double> mu(static_cast<std::size_t>(p), 0.0);
        const std::vector<double> fresh =
            opts.couple_means ? fd_mean(z) : *frozen[b];
        for (int i = 0; i < p; ++i) {
          mu[static_cast<std::size_t>(i)] =
              lambda * (*mus[b])[i] +
              (1.0 - lambda) * fresh[static_cast<std::size_t>(i)];
        }
        Matrix r(p, p);
        for (int i = 0; i < p; ++i) {
          for (int j = 0; j < p; ++j) {
            double s = 0.0;
            for (int t = 0; t < n; ++t) {
              s += (z(i, t) - mu[static_cast<std::size_t>(i)]) *
                   (z(j, t) - mu[static_cast<std::size_t>(j)]);
            }
            r(i, j) = lambda * (*rs[b])(i, j) + (1.0 - lambda) * s / n;
          }
        }
        for (int i = 0; i < p; ++i) r(i, i) += params.eps;
        lds += logdet_spd(r);
      }
      big_bang = -lds / (params.dim_normalize ? p : 1.0);
    }
    double ss = 0.0;
    for (int i = 0; i < p; ++i) {
      for (int t = 0; t < n; ++t) {
        const double d = z1(i, t) - z2(i, t);
        ss += d * d;
      }
    }
    return big_bang + params.alpha * ss / (static_cast<double>(n) * p);
  };

  // Surfaces a broken state as a clean exception before the parallel loop;
  // after this succeeds no perturbation can lose positive definiteness,
  // since the recursion only adds PSD terms to eps I.
  (void)loss_at(batch.z1, batch.z2);

  BranchGradients g{Matrix(p, n), Matrix(p, n)};
  const double h = opts.step;
  for (int branch = 0; branch < 2; ++branch) {
    Matrix& out = branch == 0 ? g.g1 : g.g2;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < p; ++i) {
      Matrix z1 = batch.z1;
      Matrix z2 = batch.z2;
      Matrix& target = branch == 0 ? z1 : z2;
      for (int t = 0; t < n; ++t) {
        const double saved = target(i, t);
        target(i, t) = saved + h;
        const double up = loss_at(z1, z2);
        target(i, t) = saved - h;
        const double down = loss_at(z1, z2);
        target(i, t) = saved;
        out(i, t) = (up - down) / (2.0 * h);
      }
    }
  }
  return g;
}

}  // namespace cimax

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cimax/linalg.hpp"
#include "cimax/loss.hpp"
#include "cimax/rng.hpp"

using namespace cimax;

namespace {

Batch random_batch(int p, int n, Rng& rng) {
  return Batch(gaussian_matrix(p, n, rng), gaussian_matrix(p, n, rng));
}

// A generic tracked state: a few warmup updates away from the identity.
CovarianceState warmed_state(int p, Rng& rng, double lambda = 0.5,
                             int steps = 3) {
  CovarianceState s = init_state(p);
  for (int l = 0; l < steps; ++l) {
    s = batch_update(s, random_batch(p, 4 * p, rng), lambda);
  }
  return s;
}

double rel_max_err(const BranchGradients& got, const BranchGradients& want) {
  const double scale =
      std::max(max_abs(want.g1), std::max(max_abs(want.g2), 1e-300));
  return std::max(max_abs_diff(got.g1, want.g1),
                  max_abs_diff(got.g2, want.g2)) /
         scale;
}

}  // namespace

TEST_CASE("parameter validation") {
  Rng rng(1);
  CovarianceState s = init_state(3);
  Batch b = random_batch(3, 4, rng);
  LossParams p;
  p.eps = 0.0;
  CHECK_THROWS_AS(objective(s, b, p), std::invalid_argument);
  p = LossParams{};
  p.alpha = -1.0;
  CHECK_THROWS_AS(objective(s, b, p), std::invalid_argument);
  p = LossParams{};
  p.lambda = 1.0;
  CHECK_THROWS_AS(grad_z(s, b, p), std::invalid_argument);
}

TEST_CASE("lambda = 0 big-bang term against an eigenvalue oracle") {
  Rng rng(301);
  const int p = 6, n = 24;
  Batch b = random_batch(p, n, rng);
  LossParams params;
  params.lambda = 0.0;
  params.alpha = 3.0;
  ObjectiveResult res = objective(init_state(p), b, params);

  // With no history the tracked covariances are the plain batch covariances,
  // so the logdets can be cross-checked through the eigenvalues.
  double expected_lds = 0.0;
  for (const Matrix* z : {&b.z1, &b.z2}) {
    Matrix c = centered_gram(*z, column_mean(*z));
    for (double e : sym_eigenvalues(add_scaled_identity(c, params.eps))) {
      expected_lds += std::log(e);
    }
  }
  const double expected_bb = -expected_lds / p;
  CHECK(res.breakdown.big_bang ==
        doctest::Approx(expected_bb).epsilon(1e-10));
  CHECK(res.breakdown.total ==
        doctest::Approx(expected_bb + 3.0 * res.breakdown.attraction)
            .epsilon(1e-12));
}

TEST_CASE("attraction is the element-mean squared branch gap") {
  const int p = 4, n = 8;
  Matrix z1(p, n), z2(p, n);
  for (std::size_t i = 0; i < z1.size(); ++i) {
    z1.data()[i] = 0.25 * static_cast<double>(i % 7);
    z2.data()[i] = z1.data()[i] - 1.0;  // unit gap everywhere
  }
  LossParams params;
  params.bigbang_enabled = false;
  params.alpha = 250.0;
  ObjectiveResult res = objective(init_state(p), Batch(z1, z2), params);
  CHECK(res.breakdown.attraction == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(res.breakdown.big_bang == 0.0);
  CHECK(res.breakdown.total == doctest::Approx(250.0).epsilon(1e-14));
}

TEST_CASE("near-frozen tracker with a zero-variance batch stays near -2 eps") {
  const int p = 5, n = 10;
  Matrix z(p, n);
  for (int t = 0; t < n; ++t) z(0, t) = 1.0;  // constant unit-norm columns
  LossParams params;
  params.lambda = 0.999999;
  params.alpha = 0.0;
  ObjectiveResult res = objective(init_state(p), Batch(z, z), params);
  // The tracker barely moves off the identity, so each logdet is about
  // p * log(1 + eps) and the normalized big-bang term is about -2 eps, up to
  // O(1 - lambda) drift.
  CHECK(std::abs(res.breakdown.big_bang + 2.0 * params.eps) <= 5e-6);
}

TEST_CASE("with alpha = 0 the total ignores the branch pairing") {
  Rng rng(307);
  const int p = 5, n = 16;
  CovarianceState s = warmed_state(p, rng);
  Matrix z1 = gaussian_matrix(p, n, rng);
  Matrix z2 = gaussian_matrix(p, n, rng);
  // Reversing the column order of z2 changes z1 - z2 and the cross block
  // but not the per-branch statistics.
  Matrix z2r(p, n);
  for (int i = 0; i < p; ++i) {
    for (int t = 0; t < n; ++t) z2r(i, t) = z2(i, n - 1 - t);
  }
  LossParams params;
  params.alpha = 0.0;
  ObjectiveResult a = objective(s, Batch(z1, z2), params);
  ObjectiveResult b = objective(s, Batch(z1, z2r), params);
  CHECK(a.breakdown.total ==
        doctest::Approx(b.breakdown.total).epsilon(1e-12));
  // The pairing does show up in the tracked mutual information.
  CHECK(a.breakdown.ldmi_tracked != b.breakdown.ldmi_tracked);
}

TEST_CASE("objective advances the tracker exactly like batch_update") {
  Rng rng(311);
  CovarianceState s = warmed_state(4, rng);
  Batch b = random_batch(4, 12, rng);
  LossParams params;
  ObjectiveResult res = objective(s, b, params);
  CovarianceState direct = batch_update(s, b, params.lambda);
  CHECK(same_values(res.state.r1, direct.r1));
  CHECK(same_values(res.state.r12, direct.r12));
}

TEST_CASE("analytic gradient matches the finite-difference oracle") {
  Rng rng(313);
  const int p = 8, n = 16;
  CovarianceState s = warmed_state(p, rng);
  Batch b = random_batch(p, n, rng);
  LossParams params;  // alpha = 250, lambda = 0.01, exact convention
  BranchGradients fd = grad_z_fd(s, b, params);
  BranchGradients an = grad_z(s, b, params);
  CHECK(rel_max_err(an, fd) <= 1e-6);
}

TEST_CASE("gradient check passes across the parameter grid") {
  Rng rng(317);
  for (double alpha : {0.0, 250.0}) {
    for (double lambda : {0.0, 0.5}) {
      for (bool dim_normalize : {true, false}) {
        const int p = 4, n = 8;
        CovarianceState s = warmed_state(p, rng);
        Batch b = random_batch(p, n, rng);
        LossParams params;
        params.alpha = alpha;
        params.lambda = lambda;
        params.dim_normalize = dim_normalize;
        CHECK(rel_max_err(grad_z(s, b, params), grad_z_fd(s, b, params)) <=
              1e-6);
      }
    }
  }
}

TEST_CASE("the halved convention is rejected by the oracle") {
  Rng rng(331);
  const int p = 6, n = 12;
  CovarianceState s = warmed_state(p, rng);
  Batch b = random_batch(p, n, rng);
  LossParams params;
  params.alpha = 0.0;  // isolate the big-bang part
  BranchGradients fd = grad_z_fd(s, b, params);

  params.bigbang_grad = BigBangGrad::halved;
  BranchGradients halved = grad_z(s, b, params);
  // Half the magnitude everywhere: the max-norm error lands at 0.5.
  CHECK(rel_max_err(halved, fd) >= 0.3);

  params.bigbang_grad = BigBangGrad::exact;
  CHECK(rel_max_err(grad_z(s, b, params), fd) <= 1e-6);
}

TEST_CASE("finite differences are exact on the pure attraction quadratic") {
  Rng rng(337);
  const int p = 4, n = 8;
  CovarianceState s = init_state(p);
  Batch b = random_batch(p, n, rng);
  LossParams params;
  params.bigbang_enabled = false;
  // Central differences have no truncation error on a quadratic; only
  // rounding remains.
  CHECK(rel_max_err(grad_z(s, b, params), grad_z_fd(s, b, params)) <= 1e-9);
}

TEST_CASE("mean coupling gap is small but nonzero") {
  Rng rng(347);
  const int p = 5, n = 10;
  CovarianceState s = warmed_state(p, rng);
  Batch b = random_batch(p, n, rng);
  LossParams params;
  params.alpha = 0.0;
  params.lambda = 0.5;  // large enough that the batch mean moves the tracker
  BranchGradients frozen = grad_z_fd(s, b, params);
  FdOptions coupled;
  coupled.couple_means = true;
  BranchGradients full = grad_z_fd(s, b, params, coupled);
  const double gap = rel_max_err(full, frozen);
  MESSAGE("relative gap between frozen-mean and fully coupled gradients: "
          << gap);
  CHECK(gap > 0.0);
  CHECK(gap < 0.5);
}

TEST_CASE("big-bang descent pushes samples away from the tracked mean") {
  Rng rng(349);
  const int p = 6, n = 20;
  CovarianceState s = warmed_state(p, rng);
  Batch b = random_batch(p, n, rng);
  LossParams params;
  params.alpha = 0.0;
  BranchGradients g = grad_z(s, b, params);
  CovarianceState next = batch_update(s, b, params.lambda);
  for (int t = 0; t < n; ++t) {
    double inner = 0.0;
    for (int i = 0; i < p; ++i) {
      inner += -g.g1(i, t) * (b.z1(i, t) - next.mu1[i]);
    }
    CHECK(inner >= 0.0);
  }
}

TEST_CASE("fused step agrees with the separate calls") {
  Rng rng(353);
  CovarianceState s = warmed_state(4, rng);
  Batch b = random_batch(4, 8, rng);
  LossParams params;
  StepResult step = objective_and_grad(s, b, params);
  ObjectiveResult obj = objective(s, b, params);
  BranchGradients g = grad_z(s, b, params);
  CHECK(step.breakdown.total == obj.breakdown.total);
  CHECK(step.breakdown.ldmi_tracked == obj.breakdown.ldmi_tracked);
  CHECK(same_values(step.state.r1, obj.state.r1));
  CHECK(same_values(step.grads.g1, g.g1));
  CHECK(same_values(step.grads.g2, g.g2));
}

TEST_CASE("jitter escalation reports the shift it settled on") {
  // Hand-build a state with a slightly negative eigenvalue; a nearly frozen
  // tracker keeps it there, so the base shift of 1e-8 cannot rescue the
  // factorization and escalation kicks in.
  CovarianceState s = init_state(2);
  s.r1 = Matrix{{-1e-6, 0.0}, {0.0, 1.0}};
  Matrix z(2, 4);
  LossParams params;
  params.lambda = 0.999;
  ObjectiveResult res = objective(s, Batch(z, z), params);
  CHECK(res.breakdown.eps_used > params.eps);
  CHECK(std::isfinite(res.breakdown.total));
}

TEST_CASE("gradients are deterministic") {
  Rng rng_a(359), rng_b(359);
  CovarianceState sa = warmed_state(5, rng_a);
  CovarianceState sb = warmed_state(5, rng_b);
  Batch ba = random_batch(5, 12, rng_a);
  Batch bb = random_batch(5, 12, rng_b);
  LossParams params;
  CHECK(same_values(grad_z_fd(sa, ba, params).g1,
                    grad_z_fd(sb, bb, params).g1));
  CHECK(same_values(grad_z(sa, ba, params).g2, grad_z(sb, bb, params).g2));
}

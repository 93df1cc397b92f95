#include "cimax/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cimax {
namespace {

void require_square(const Matrix& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(op) + ": matrix not square (" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ")");
  }
}

// Forward substitution L y = b, then back substitution L^T x = y,
// one right-hand-side column at a time.
void solve_with_factor(const Matrix& l, const double* b, double* x, int n) {
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
}

}  // namespace

Matrix cholesky(const Matrix& a, const CholeskyOptions& opts) {
  require_square(a, "cholesky");
  const int n = a.rows();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > opts.pivot_floor)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) +
                                " is " + std::to_string(d) +
                                ", at or below floor " +
                                std::to_string(opts.pivot_floor));
    }
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

double logdet_spd(const Matrix& a) {
  const Matrix l = cholesky(a);
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

double logdet_spd_jittered(const Matrix& a, double eps, int max_steps,
                           double* shift_used) {
  double shift = eps;
  for (int attempt = 0;; ++attempt) {
    try {
      const double value = logdet_spd(add_scaled_identity(a, shift));
      if (shift_used != nullptr) *shift_used = shift;
      return value;
    } catch (const NotPositiveDefinite&) {
      if (attempt >= max_steps) throw;
      shift *= 10.0;
    }
  }
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require_square(a, "solve_spd");
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("solve_spd: rhs has " +
                                std::to_string(b.rows()) + " rows, expected " +
                                std::to_string(a.rows()));
  }
  const int n = a.rows();
  const Matrix l = cholesky(a);
  Matrix x(n, b.cols());
  std::vector<double> rhs(static_cast<std::size_t>(n));
  std::vector<double> sol(static_cast<std::size_t>(n));
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < n; ++i) rhs[i] = b(i, j);
    solve_with_factor(l, rhs.data(), sol.data(), n);
    for (int i = 0; i < n; ++i) x(i, j) = sol[i];
  }
  return x;
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  require_square(a, "solve_spd");
  if (a.rows() != b.size()) {
    throw std::invalid_argument("solve_spd: rhs length mismatch");
  }
  const Matrix l = cholesky(a);
  Vector x(b.size());
  solve_with_factor(l, b.data(), x.data(), b.size());
  return x;
}

Matrix inverse_spd(const Matrix& a) {
  return solve_spd(a, Matrix::identity(a.rows()));
}

std::vector<double> sym_eigenvalues(const Matrix& a) {
  require_square(a, "sym_eigenvalues");
  const int n = a.rows();
  const double scale = max_abs(a);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * std::max(1.0, scale)) {
        throw std::invalid_argument(
            "sym_eigenvalues: input asymmetric at (" + std::to_string(i) +
            "," + std::to_string(j) + ")");
      }
    }
  }

  Matrix m = symmetrize(a);
  const double norm = frobenius_norm(m);
  std::vector<double> eig(static_cast<std::size_t>(n));
  if (norm == 0.0 || n == 1) {
    for (int i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = m(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
  }

  auto off_norm = [&m, n]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) s += 2.0 * m(i, j) * m(i, j);
    }
    return std::sqrt(s);
  };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-12 * norm; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) < 1e-300) {
          m(p, q) = m(q, p) = 0.0;
          continue;
        }
        // Rotation angle from the standard stable formulas.
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = m(p, k) = c * mkp - s * mkq;
          m(k, q) = m(q, k) = s * mkp + c * mkq;
        }
        m(p, p) -= t * apq;
        m(q, q) += t * apq;
        m(p, q) = m(q, p) = 0.0;
      }
    }
  }

  for (int i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = m(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

double effective_rank(const std::vector<double>& eigenvalues) {
  double total = 0.0;
  for (double e : eigenvalues) total += std::max(e, 0.0);
  if (total <= 0.0) return 1.0;
  double entropy = 0.0;
  for (double e : eigenvalues) {
    const double p = std::max(e, 0.0) / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

}  // namespace cimax

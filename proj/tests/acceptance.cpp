// Acceptance gate. Runs every primary criterion end to end and prints one
// [PASS]/[FAIL] line per criterion; the exit status is the failure count.
// Artifacts land in ./acceptance_artifacts so the reports survive the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cimax/covtrack.hpp"
#include "cimax/data.hpp"
#include "cimax/errors.hpp"
#include "cimax/eval.hpp"
#include "cimax/infomeasures.hpp"
#include "cimax/linalg.hpp"
#include "cimax/loss.hpp"
#include "cimax/matrix.hpp"
#include "cimax/net.hpp"
#include "cimax/rng.hpp"
#include "cimax/train.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace cimax;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", index, name,
              detail.c_str());
  std::fflush(stdout);
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int run_cmd(const std::string& command) {
  const int status = std::system(command.c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string fmt(const char* pattern, ...) {
  char buffer[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buffer, sizeof buffer, pattern, args);
  va_end(args);
  return buffer;
}

// Average ranks, ties sharing the mean of the positions they occupy.
std::vector<double> average_ranks(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)];
  });
  std::vector<double> ranks(static_cast<std::size_t>(n));
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[static_cast<std::size_t>(idx[static_cast<std::size_t>(
                            j + 1)])] ==
                            v[static_cast<std::size_t>(
                                idx[static_cast<std::size_t>(i)])]) {
      ++j;
    }
    const double shared = 1.0 + 0.5 * (i + j);
    for (int k = i; k <= j; ++k) {
      ranks[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] =
          shared;
    }
    i = j + 1;
  }
  return ranks;
}

// Pearson correlation of the average ranks. NaN when either series is
// constant, which leaves the correlation undefined.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return std::nan("");
  return cov / std::sqrt(va * vb);
}

// ===================== criteria 1 and 9: exec the CLI =====================

void criterion_gradcheck(const std::string& dir) {
  const double t0 = now_seconds();
  const int code = run_cmd(std::string(CIMAX_BIN) +
                           " gradcheck --cases 20 --tolerance 1e-6 --out-dir " +
                           dir + " > " + dir + "/gradcheck.log");
  const double secs = now_seconds() - t0;

  std::string max_line = "max_rel_err not found";
  std::ifstream file(dir + "/gradcheck.txt");
  for (std::string line; std::getline(file, line);) {
    if (line.rfind("max_rel_err", 0) == 0) max_line = line;
  }
  report(1, "gradient fidelity", code == 0 && secs < 30.0,
         fmt("%s over 20 cases, exit %d, %.1fs (limit 30s)", max_line.c_str(),
             code, secs));
}

void criterion_overhead(const std::string& dir) {
  const double t0 = now_seconds();
  const int code =
      run_cmd(std::string(CIMAX_BIN) + " bench-logdet --budget 0.2 --out-dir " +
              dir + " > " + dir + "/bench.log");
  const double secs = now_seconds() - t0;

  std::vector<double> fractions;
  std::vector<int> sizes;
  std::ifstream file(dir + "/bench_logdet.csv");
  std::string line;
  std::getline(file, line);  // header
  while (std::getline(file, line)) {
    int p, batch;
    double t_logdet, t_step, fraction;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &p, &batch, &t_logdet,
                    &t_step, &fraction) == 5) {
      sizes.push_back(p);
      fractions.push_back(fraction);
    }
  }
  std::string detail;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    detail += fmt("P=%d %.1f%%  ", sizes[i], 100.0 * fractions[i]);
  }
  const bool reported = code == 0 && sizes.size() == 3;
  const bool soft = reported && fractions.back() <= 0.10;
  detail += soft ? "(soft 10% expectation holds" : "(soft 10% expectation";
  detail += fmt("%s, %.0fs, table %s/bench_logdet.csv)",
                soft ? "" : (reported ? " exceeded, informational only" : ""),
                secs, dir.c_str());
  report(9, "logdet overhead report", reported, detail);
}

// ==================== criterion 2 and 3: LDMI properties ==================

SecondOrderPair random_joint_pair(int p, int q, Rng& rng) {
  const int d = p + q;
  const Matrix a = gaussian_matrix(d, d + 4, rng);
  const Matrix j = matmul(a, transpose(a));
  Matrix r_x(p, p), r_y(q, q), r_xy(p, q);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) r_x(r, c) = j(r, c);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) r_y(r, c) = j(p + r, p + c);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < q; ++c) r_xy(r, c) = j(r, p + c);
  return SecondOrderPair(r_x, r_y, r_xy, gaussian_vector(p, rng),
                         gaussian_vector(q, rng));
}

void criterion_lemma1() {
  const double t0 = now_seconds();
  const double eps = 1e-8;
  Rng rng(4000);

  double min_value = 1e300;
  double max_forced_zero = 0.0;
  double min_strong_cross = 1e300;
  for (int i = 0; i < 1000; ++i) {
    const int p = 1 + static_cast<int>(rng.uniform_index(8));
    const int q = 1 + static_cast<int>(rng.uniform_index(8));
    const SecondOrderPair pair = random_joint_pair(p, q, rng);
    min_value = std::min(min_value, ldmi_symmetric(pair, eps));

    const SecondOrderPair cut(pair.r_x(), pair.r_y(), Matrix(p, q),
                              pair.mu_x(), pair.mu_y());
    max_forced_zero =
        std::max(max_forced_zero, std::fabs(ldmi_symmetric(cut, eps)));

    // Unit auto-covariances with an orthogonal cross block of Frobenius
    // norm c sqrt(p) >= 0.2: the joint stays positive definite for c < 1.
    const double c = rng.uniform(0.2, 0.8);
    const Matrix cross = c * testutil::random_orthogonal(p, rng);
    const SecondOrderPair strong(Matrix::identity(p), Matrix::identity(p),
                                 cross, Vector(p), Vector(p));
    min_strong_cross =
        std::min(min_strong_cross, ldmi_symmetric(strong, eps));
  }
  const double secs = now_seconds() - t0;
  const bool pass = min_value >= -1e-9 && max_forced_zero <= 1e-9 &&
                    min_strong_cross >= 1e-4 && secs < 10.0;
  report(2, "nonnegativity and zero-iff-uncorrelated", pass,
         fmt("min=%.2e, forced-zero max=%.2e, strong-cross min=%.2e over "
             "1000 pairs, %.1fs (limit 10s)",
             min_value, max_forced_zero, min_strong_cross, secs));
}

void criterion_scalar_closed_form() {
  double worst = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double rho = 0.1 * k;
    const SecondOrderPair pair(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{rho}},
                               Vector{0.0}, Vector{0.0});
    const double expected = -0.5 * std::log(1.0 - rho * rho);
    worst = std::max(worst, std::fabs(ldmi(pair, 0.0) - expected));
    worst = std::max(worst, std::fabs(ldmi_symmetric(pair, 0.0) - expected));
  }
  report(3, "scalar closed form", worst <= 1e-10,
         fmt("max abs err %.2e vs -log(1-rho^2)/2 for rho 0.1..0.9", worst));
}

// ======================= criterion 4: logdet oracle =======================

void criterion_logdet_oracle() {
  Rng rng(4100);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform_index(63));
    const Matrix a = testutil::random_spd(n, rng, 0.5);
    double eigen_sum = 0.0;
    for (const double ev : sym_eigenvalues(a)) eigen_sum += std::log(ev);
    const double rel = std::fabs(logdet_spd(a) - eigen_sum) /
                       std::max(1.0, std::fabs(eigen_sum));
    worst = std::max(worst, rel);
  }
  report(4, "logdet vs eigenvalue sum", worst <= 1e-8,
         fmt("max rel err %.2e over 50 random matrices up to 64x64", worst));
}

// ====================== criterion 5: covariance tracker ===================

void criterion_tracker() {
  // Full forgetting: one update must equal the direct batch covariance.
  Rng rng(4200);
  const Matrix z1 = gaussian_matrix(6, 32, rng);
  const Matrix z2 = gaussian_matrix(6, 32, rng);
  const CovarianceState one = batch_update(init_state(6), Batch(z1, z2), 0.0);
  const double direct_err = std::max(
      max_abs_diff(one.r1, centered_gram(z1, column_mean(z1))),
      max_abs_diff(one.r2, centered_gram(z2, column_mean(z2))));

  // Stationary stream: 500 batches of 256 samples from a fixed Gaussian.
  const int p = 4, n = 256, steps = 500;
  Rng truth_rng(5);
  const Matrix truth = testutil::random_spd(p, truth_rng, 0.5);
  const Matrix l = cholesky(truth);
  const Vector mean{1.0, -0.5, 0.25, 2.0};

  Rng stream(7);
  CovarianceState state = init_state(p);
  for (int s = 0; s < steps; ++s) {
    Matrix a = matmul(l, gaussian_matrix(p, n, stream));
    Matrix b = matmul(l, gaussian_matrix(p, n, stream));
    for (int col = 0; col < n; ++col) {
      for (int row = 0; row < p; ++row) {
        a(row, col) += mean[row];
        b(row, col) += mean[row];
      }
    }
    state = batch_update(state, Batch(a, b), 0.01);
  }
  const double rel = frobenius_norm(state.r1 - truth) / frobenius_norm(truth);

  report(5, "covariance tracker", direct_err <= 1e-12 && rel <= 0.15,
         fmt("direct-batch err %.1e (limit 1e-12), stationary rel %.3f "
             "(limit 0.15)",
             direct_err, rel));
}

// ================ criteria 6, 7, 8: the desk benchmark ====================

Dataset benchmark_dataset() { return gen_blobs(4, 500, 16, 8.0, 1.0, 7); }

NetConfig benchmark_net() {
  NetConfig net;
  net.input_dim = 16;
  net.encoder_dims = {64, 64};
  net.projector_dims = {64, 16};
  return net;
}

TrainConfig benchmark_train(bool bigbang) {
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 128;
  tc.loss.alpha = 250.0;  // picked from {100, 250, 500}; all three pass
  tc.loss.bigbang_enabled = bigbang;
  tc.augment.noise_std = 0.25;
  return tc;
}

double probe_holdout_accuracy(const MlpParams& params, const NetConfig& net,
                              const Dataset& ds) {
  std::vector<int> order(static_cast<std::size_t>(ds.size()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(1);
  for (int i = ds.size() - 1; i > 0; --i) {
    const int j = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  const int eval_count = ds.size() / 5;
  const int train_count = ds.size() - eval_count;
  const Matrix all = embed(params, net, ds.features);
  auto slice = [&](int begin, int count) {
    Matrix x(all.rows(), count);
    std::vector<int> labels(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) {
      const int col = order[static_cast<std::size_t>(begin + t)];
      for (int i = 0; i < all.rows(); ++i) x(i, t) = all(i, col);
      labels[static_cast<std::size_t>(t)] =
          ds.labels[static_cast<std::size_t>(col)];
    }
    return std::make_pair(std::move(x), std::move(labels));
  };
  const auto [train_x, train_y] = slice(0, train_count);
  const auto [eval_x, eval_y] = slice(train_count, eval_count);
  const ProbeParams probe =
      probe_train(train_x, train_y, ds.num_classes, 100, 0.1, 0.9, 1);
  return probe_accuracy(probe, eval_x, eval_y);
}

void criteria_benchmark() {
  const Dataset ds = benchmark_dataset();
  const NetConfig net = benchmark_net();

  // One run feeds both the quality gate and the trend check; the probe is
  // retrained from scratch every 20 epochs on the current embeddings.
  std::vector<double> ldmi_series, acc_series;
  const double t0 = now_seconds();
  const PretrainResult res = pretrain(
      ds, net, benchmark_train(true),
      [&](int epoch, const MlpParams& params, const CovarianceState&,
          const EpochMetrics& m) {
        if ((epoch + 1) % 20 != 0) return;
        ldmi_series.push_back(m.ldmi_tracked);
        acc_series.push_back(probe_holdout_accuracy(params, net, ds));
      });
  const double secs = now_seconds() - t0;

  const EpochMetrics& last = res.metrics.back();
  const double final_acc = acc_series.back();
  report(6, "desk benchmark",
         final_acc >= 0.95 && last.min_eig >= 1e-3 &&
             last.effective_rank >= 8.0 && secs < 180.0,
         fmt("probe %.4f (floor 0.95), min_eig %.2e (floor 1e-3), "
             "effective_rank %.2f (floor 8), %.0fs (limit 180s)",
             final_acc, last.min_eig, last.effective_rank, secs));

  // Attraction-only ablation: the expansion term is the collapse barrier.
  const PretrainResult ablated = pretrain(ds, net, benchmark_train(false));
  const EpochMetrics& ab = ablated.metrics.back();
  report(7, "collapse ablation",
         ab.effective_rank <= 1.5 || ab.min_eig <= 1e-6,
         fmt("big-bang off: effective_rank %.2f, min_eig %.2e (needs rank "
             "<= 1.5 or min_eig <= 1e-6)",
             ab.effective_rank, ab.min_eig));

  const double first_ldmi = res.metrics.front().ldmi_tracked;
  const double last_ldmi = last.ldmi_tracked;
  const double rho = spearman(ldmi_series, acc_series);
  std::string series = "acc series";
  for (const double a : acc_series) series += fmt(" %.4f", a);
  report(8, "ldmi trend", last_ldmi > first_ldmi && rho >= 0.7,
         fmt("ldmi %.2f -> %.2f, spearman %.3f (floor 0.7); %s", first_ldmi,
             last_ldmi, rho, series.c_str()));
}

}  // namespace

int main() {
  const std::string dir = "acceptance_artifacts";
  fs::create_directories(dir);
  std::printf("acceptance gate, artifacts in %s/\n", dir.c_str());

  criterion_gradcheck(dir);
  criterion_lemma1();
  criterion_scalar_closed_form();
  criterion_logdet_oracle();
  criterion_tracker();
  criteria_benchmark();
  criterion_overhead(dir);

  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}

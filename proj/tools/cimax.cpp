// Command-line driver: dataset generation, CorInfoMax pretraining, linear
// probing, gradient checking, spectrum reporting, and a logdet overhead
// micro-benchmark. Exit codes: 0 success, 1 usage/config error, 2 numerical
// failure, 3 IO error.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cimax/config.hpp"
#include "cimax/data.hpp"
#include "cimax/errors.hpp"
#include "cimax/eval.hpp"
#include "cimax/linalg.hpp"
#include "cimax/loss.hpp"
#include "cimax/net.hpp"
#include "cimax/train.hpp"

namespace {

using namespace cimax;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;  // overrides the config when nonempty
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--set", args.overrides,
                  "override one config key, e.g. --set alpha=500");
  cmd->add_option("--out-dir", args.out_dir, "artifact directory");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config = args.config_path.empty()
                         ? RunConfig{}
                         : parse_config_file(args.config_path);
  for (const std::string& entry : args.overrides) {
    apply_config_entry(config, entry, "--set");
  }
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  return config;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ============================== commands =================================

int cmd_gen_data(const CommonArgs& args, const std::string& out_path) {
  const RunConfig c = resolve_config(args);
  const std::string path =
      out_path.empty() ? c.out_dir + "/dataset.csv" : out_path;
  const Dataset ds = gen_blobs(c.num_classes, c.per_class, c.input_dim,
                               c.separation, c.within_std, c.data_seed);
  save_table(path, ds);
  std::printf("wrote %s (%d samples, %d dims, %d classes)\n", path.c_str(),
              ds.size(), ds.dim(), ds.num_classes);
  return 0;
}

int cmd_pretrain(const CommonArgs& args, const std::string& data_path) {
  const RunConfig c = resolve_config(args);
  const Dataset ds = load_table(data_path);
  const NetConfig net = c.net_config();

  const PretrainResult result = pretrain(ds, net, c.train);

  save_checkpoint(c.out_dir + "/checkpoint.cimx", result.params);
  save_metrics_csv(c.out_dir + "/metrics.csv", result.metrics);
  {
    const std::string path = c.out_dir + "/effective_config.txt";
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw IoError("cannot write " + path);
    file << dump_config(c);
  }

  if (result.metrics.empty()) {
    std::printf("pretrain: 0 epochs, wrote initial checkpoint to %s\n",
                c.out_dir.c_str());
  } else {
    const EpochMetrics& last = result.metrics.back();
    std::printf(
        "pretrain: %d epochs, total_loss=%.6g ldmi=%.6g min_eig=%.3g "
        "effective_rank=%.3g, artifacts in %s\n",
        c.train.epochs, last.total_loss, last.ldmi_tracked, last.min_eig,
        last.effective_rank, c.out_dir.c_str());
  }
  return 0;
}

int cmd_probe(const CommonArgs& args, const std::string& data_path,
              const std::string& checkpoint_path) {
  const RunConfig c = resolve_config(args);
  const std::string ckpt = checkpoint_path.empty()
                               ? c.out_dir + "/checkpoint.cimx"
                               : checkpoint_path;
  const MlpParams params = load_checkpoint(ckpt);
  const Dataset ds = load_table(data_path);
  const NetConfig net = c.net_config();

  // Optional held-out split: shuffle columns, train the probe on the front,
  // score the tail. probe_holdout = 0 scores the training set itself.
  std::vector<int> order(static_cast<std::size_t>(ds.size()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(c.probe_seed);
  for (int i = ds.size() - 1; i > 0; --i) {
    const int j = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  const int eval_count = static_cast<int>(c.probe_holdout * ds.size());
  const int train_count = ds.size() - eval_count;
  if (train_count < ds.num_classes) {
    throw ConfigError("probe_holdout leaves too few training samples");
  }

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
  const ProbeParams probe =
      probe_train(train_x, train_y, ds.num_classes, c.probe_epochs, c.probe_lr,
                  0.9, c.probe_seed);
  double accuracy;
  if (eval_count > 0) {
    const auto [eval_x, eval_y] = slice(train_count, eval_count);
    accuracy = probe_accuracy(probe, eval_x, eval_y);
  } else {
    accuracy = probe_accuracy(probe, train_x, train_y);
  }

  // Collapse diagnostics from the projector outputs of the whole dataset.
  const ForwardCache cache = forward(params, net, ds.features);
  const Matrix r = centered_gram(cache.z, column_mean(cache.z));
  const SpectrumReport spectrum = spectrum_report(r);

  append_probe_csv(c.out_dir + "/probe_results.csv", c.run_id, accuracy,
                   spectrum.min_eig, spectrum.effective_rank);
  std::printf("probe: accuracy=%.4f min_eig=%.4g effective_rank=%.4g (%s)\n",
              accuracy, spectrum.min_eig, spectrum.effective_rank,
              eval_count > 0 ? "held-out" : "train set");
  return 0;
}

int cmd_gradcheck(const CommonArgs& args, int cases, double tolerance) {
  const RunConfig c = resolve_config(args);
  LossParams loss = c.train.loss;
  loss.lambda = c.train.forgetting;

  const int dims[] = {4, 8, 16};
  const int widths[] = {8, 32};
  double max_rel = 0.0;

  const std::string report_path = c.out_dir + "/gradcheck.txt";
  std::ofstream report(report_path, std::ios::trunc);
  if (!report) throw IoError("cannot write " + report_path);
  report << "case,P,N,rel_err\n";

  for (int i = 0; i < cases; ++i) {
    const int p = dims[i % 3];
    const int n = widths[i % 2];
    Rng rng(1000 + static_cast<std::uint64_t>(i));

    // Drive a fresh tracker through a few batches so the checked state is a
    // reachable one rather than an arbitrary matrix.
    CovarianceState state = init_state(p);
    for (int warm = 0; warm < 3; ++warm) {
      state = batch_update(
          state, Batch(gaussian_matrix(p, n, rng), gaussian_matrix(p, n, rng)),
          loss.lambda);
    }
    const Batch batch(gaussian_matrix(p, n, rng), gaussian_matrix(p, n, rng));

    const BranchGradients analytic = grad_z(state, batch, loss);
    const BranchGradients fd = grad_z_fd(state, batch, loss);
    const double scale =
        std::max({max_abs(fd.g1), max_abs(fd.g2), 1e-12});
    const double rel = std::max(max_abs_diff(analytic.g1, fd.g1),
                                max_abs_diff(analytic.g2, fd.g2)) /
                       scale;
    max_rel = std::max(max_rel, rel);
    char row[96];
    std::snprintf(row, sizeof row, "%d,%d,%d,%.6e\n", i, p, n, rel);
    report << row;
  }
  char summary[96];
  std::snprintf(summary, sizeof summary, "max_rel_err = %.6e\n", max_rel);
  report << summary;
  const bool pass = max_rel <= tolerance;
  report << (pass ? "PASS" : "FAIL") << " (tolerance " << tolerance << ")\n";

  std::printf("gradcheck: %d cases, %s", cases, summary);
  std::printf("%s (tolerance %g, report %s)\n", pass ? "PASS" : "FAIL",
              tolerance, report_path.c_str());
  return pass ? 0 : 2;
}

int cmd_spectrum(const CommonArgs& args, const std::string& data_path,
                 const std::string& checkpoint_path) {
  const RunConfig c = resolve_config(args);
  const std::string ckpt = checkpoint_path.empty()
                               ? c.out_dir + "/checkpoint.cimx"
                               : checkpoint_path;
  const MlpParams params = load_checkpoint(ckpt);
  const Dataset ds = load_table(data_path);

  const ForwardCache cache = forward(params, c.net_config(), ds.features);
  const Matrix r = centered_gram(cache.z, column_mean(cache.z));
  const SpectrumReport spectrum = spectrum_report(r);

  const std::string path = c.out_dir + "/spectrum.csv";
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot write " + path);
  file << "index,eigenvalue\n";
  char row[64];
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
    std::snprintf(row, sizeof row, "%zu,%.10g\n", i, spectrum.eigenvalues[i]);
    file << row;
  }

  std::printf(
      "spectrum: P=%d min_eig=%.4g max_eig=%.4g effective_rank=%.4g "
      "(table %s)\n",
      static_cast<int>(spectrum.eigenvalues.size()), spectrum.min_eig,
      spectrum.max_eig, spectrum.effective_rank, path.c_str());
  return 0;
}

int cmd_bench_logdet(const CommonArgs& args, double budget, int batch,
                     int width, std::vector<int> sizes) {
  const RunConfig c = resolve_config(args);
  if (sizes.empty()) sizes = {64, 128, 256};
  LossParams loss = c.train.loss;
  loss.lambda = c.train.forgetting;

  const std::string path = c.out_dir + "/bench_logdet.csv";
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot write " + path);
  file << "P,batch,logdet_seconds,step_seconds,fraction\n";

  std::printf("logdet share of one training step (batch %d, width %d)\n",
              batch, width);
  std::printf("%8s %16s %16s %10s\n", "P", "logdet_s", "step_s", "fraction");

  for (const int p : sizes) {
    NetConfig net;
    net.input_dim = 64;
    net.encoder_dims = {width, width};
    net.projector_dims = {width, p};
    Rng rng(1);
    MlpParams params = init_params(net, rng);
    SgdState sgd = init_sgd(params);
    const Matrix x1 = gaussian_matrix(64, batch, rng);
    const Matrix x2 = gaussian_matrix(64, batch, rng);

    // Settle the tracker once so the timed step sees a realistic state.
    CovarianceState state = init_state(p);
    {
      const ForwardCache c1 = forward(params, net, x1);
      const ForwardCache c2 = forward(params, net, x2);
      state = batch_update(state, Batch(c1.z, c2.z), loss.lambda);
    }

    // One full training step: both forwards, loss with gradients, both
    // backward passes, optimizer update.
    auto step = [&]() {
      const ForwardCache c1 = forward(params, net, x1);
      const ForwardCache c2 = forward(params, net, x2);
      const StepResult res =
          objective_and_grad(state, Batch(c1.z, c2.z), loss);
      ParamGradients grads = backward(params, net, c1, res.grads.g1);
      accumulate(grads, backward(params, net, c2, res.grads.g2));
      sgd_step(params, sgd, grads, 1e-6, 0.9, 0.0);
    };

    // The logdet-specific work inside that step: the two factorized
    // log-determinants plus the two linear solves behind the big-bang
    // gradient, on the same advanced state.
    const ForwardCache c1 = forward(params, net, x1);
    const ForwardCache c2 = forward(params, net, x2);
    const Batch b(c1.z, c2.z);
    const CovarianceState next = batch_update(state, b, loss.lambda);
    auto logdet_work = [&]() {
      double shift = 0.0;
      (void)logdet_spd_jittered(next.r1, loss.eps, 3, &shift);
      (void)logdet_spd_jittered(next.r2, loss.eps, 3, &shift);
      (void)solve_spd(add_scaled_identity(next.r1, loss.eps),
                      centered(b.z1, next.mu1));
      (void)solve_spd(add_scaled_identity(next.r2, loss.eps),
                      centered(b.z2, next.mu2));
    };

    auto measure = [&](auto&& work) {
      work();  // warm
      int reps = 0;
      const double start = now_seconds();
      double elapsed = 0.0;
      while (elapsed < budget) {
        work();
        ++reps;
        elapsed = now_seconds() - start;
      }
      return elapsed / reps;
    };

    const double t_step = measure(step);
    const double t_logdet = measure(logdet_work);
    const double fraction = t_logdet / t_step;

    char row[128];
    std::snprintf(row, sizeof row, "%d,%d,%.6e,%.6e,%.4f\n", p, batch,
                  t_logdet, t_step, fraction);
    file << row;
    std::printf("%8d %16.6e %16.6e %9.2f%%\n", p, t_logdet, t_step,
                100.0 * fraction);
  }
  std::printf(
      "informational: expected fraction at P=256 is below 10%% "
      "(table %s)\n",
      path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CorInfoMax training toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a blobs dataset");
  add_common(gen, gen_args);
  gen->add_option("-o,--out", gen_out, "dataset path (default out_dir/dataset.csv)");

  CommonArgs pre_args;
  std::string pre_data;
  CLI::App* pre = app.add_subcommand("pretrain", "run CorInfoMax pretraining");
  add_common(pre, pre_args);
  pre->add_option("--data", pre_data, "dataset file")->required();

  CommonArgs probe_args;
  std::string probe_data, probe_ckpt;
  CLI::App* probe = app.add_subcommand("probe", "linear probe on frozen encoder");
  add_common(probe, probe_args);
  probe->add_option("--data", probe_data, "dataset file")->required();
  probe->add_option("--checkpoint", probe_ckpt,
                    "checkpoint (default out_dir/checkpoint.cimx)");

  CommonArgs grad_args;
  int grad_cases = 20;
  double grad_tol = 1e-6;
  CLI::App* grad = app.add_subcommand(
      "gradcheck", "compare analytic loss gradients with finite differences");
  add_common(grad, grad_args);
  grad->add_option("--cases", grad_cases, "number of random cases")
      ->check(CLI::PositiveNumber);
  grad->add_option("--tolerance", grad_tol, "max relative error to pass");

  CommonArgs spec_args;
  std::string spec_data, spec_ckpt;
  CLI::App* spec = app.add_subcommand("spectrum",
                                      "projector covariance eigenvalue table");
  add_common(spec, spec_args);
  spec->add_option("--data", spec_data, "dataset file")->required();
  spec->add_option("--checkpoint", spec_ckpt,
                   "checkpoint (default out_dir/checkpoint.cimx)");

  CommonArgs bench_args;
  double bench_budget = 0.4;
  int bench_batch = 256, bench_width = 512;
  std::vector<int> bench_sizes;
  CLI::App* bench = app.add_subcommand(
      "bench-logdet", "logdet share of a training step at several widths");
  add_common(bench, bench_args);
  bench->add_option("--budget", bench_budget, "seconds per measurement");
  bench->add_option("--batch", bench_batch, "batch size")
      ->check(CLI::PositiveNumber);
  bench->add_option("--width", bench_width, "hidden layer width")
      ->check(CLI::PositiveNumber);
  bench->add_option("--sizes", bench_sizes, "projector dims to time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args, gen_out);
    if (pre->parsed()) return cmd_pretrain(pre_args, pre_data);
    if (probe->parsed()) return cmd_probe(probe_args, probe_data, probe_ckpt);
    if (grad->parsed()) return cmd_gradcheck(grad_args, grad_cases, grad_tol);
    if (spec->parsed()) return cmd_spectrum(spec_args, spec_data, spec_ckpt);
    if (bench->parsed()) {
      return cmd_bench_logdet(bench_args, bench_budget, bench_batch,
                              bench_width, bench_sizes);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "cimax: %s\n", e.what());
    return 1;
  } catch (const NotPositiveDefinite& e) {
    std::fprintf(stderr, "cimax: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "cimax: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cimax: %s\n", e.what());
    return 1;
  }
  return 1;
}

#include "cimax/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cimax/errors.hpp"
#include "cimax/linalg.hpp"

namespace cimax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs >= 0, "TrainConfig: epochs must be nonnegative");
  require(batch_size >= 1, "TrainConfig: batch_size must be at least 1");
  require(lr_start > 0.0 && lr_max > 0.0 && lr_min > 0.0,
          "TrainConfig: learning rates must be positive");
  require(lr_min <= lr_max, "TrainConfig: lr_min must not exceed lr_max");
  require(warmup_epochs >= 0 && warmup_epochs <= epochs,
          "TrainConfig: warmup_epochs must lie in [0, epochs]");
  require(momentum >= 0.0 && momentum < 1.0,
          "TrainConfig: momentum must lie in [0, 1)");
  require(weight_decay >= 0.0, "TrainConfig: weight_decay must be nonnegative");
  require(forgetting >= 0.0 && forgetting < 1.0,
          "TrainConfig: forgetting must lie in [0, 1)");
  augment.validate();
}

double schedule_lr(int step, int total_steps, int warmup_steps,
                   double lr_start, double lr_max, double lr_min) {
  require(total_steps > 0, "schedule_lr: total_steps must be positive");
  require(step >= 0 && step < total_steps,
          "schedule_lr: step outside [0, total_steps)");
  require(warmup_steps >= 0 && warmup_steps <= total_steps,
          "schedule_lr: warmup_steps outside [0, total_steps]");
  if (step < warmup_steps) {
    return lr_start + (lr_max - lr_start) * step / warmup_steps;
  }
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(M_PI * progress));
}

EpochMetrics collect_metrics(const CovarianceState& state,
                             const LossBreakdown& breakdown, double lr) {
  EpochMetrics m;
  m.total_loss = breakdown.total;
  m.big_bang = breakdown.big_bang;
  m.attraction = breakdown.attraction;
  m.ldmi_tracked = breakdown.ldmi_tracked;
  m.learning_rate = lr;

  const std::vector<double> eigs = sym_eigenvalues(state.r1);
  m.max_eig = eigs.front();
  m.min_eig = eigs.back();
  m.effective_rank = effective_rank(eigs);
  return m;
}

PretrainResult pretrain(const Dataset& dataset, const NetConfig& net_config,
                        const TrainConfig& train_config,
                        const EpochObserver& observer) {
  dataset.validate();
  net_config.validate();
  train_config.validate();
  require(net_config.input_dim == dataset.dim(),
          "pretrain: net input_dim does not match the dataset");
  require(train_config.batch_size <= dataset.size(),
          "pretrain: batch_size exceeds dataset size");

  const Rng base(train_config.seed);
  // Substream layout: (0,0) init, (1,epoch) batch order, (epoch+2, column)
  // per-sample augmentation.
  Rng init_rng = base.derive(0, 0);

  PretrainResult result;
  result.params = init_params(net_config, init_rng);
  result.state = init_state(net_config.projector_dim());
  if (train_config.epochs == 0) return result;

  SgdState sgd = init_sgd(result.params);
  LossParams loss_params = train_config.loss;
  loss_params.lambda = train_config.forgetting;

  const int steps_per_epoch = dataset.size() / train_config.batch_size;
  const int total_steps = train_config.epochs * steps_per_epoch;
  const int warmup_steps = train_config.warmup_epochs * steps_per_epoch;
  const int d_in = dataset.dim();

  int step = 0;
  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    const std::uint64_t shuffle_seed = base.derive(1, static_cast<std::uint64_t>(epoch)).next_u64();
    const auto parts =
        batches(dataset, train_config.batch_size, shuffle_seed, true);

    LossBreakdown last_breakdown;
    double last_lr = 0.0;
    for (const std::vector<int>& part : parts) {
      const int n = static_cast<int>(part.size());
      Matrix x1(d_in, n), x2(d_in, n);
      for (int k = 0; k < n; ++k) {
        const int idx = part[static_cast<std::size_t>(k)];
        Vector sample(d_in);
        for (int i = 0; i < d_in; ++i) sample[i] = dataset.features(i, idx);
        Rng sample_rng = base.derive(static_cast<std::uint64_t>(epoch) + 2,
                                     static_cast<std::uint64_t>(idx));
        const auto [v1, v2] =
            augment_pair(sample, train_config.augment, sample_rng);
        for (int i = 0; i < d_in; ++i) {
          x1(i, k) = v1[i];
          x2(i, k) = v2[i];
        }
      }

      const ForwardCache cache1 = forward(result.params, net_config, x1);
      const ForwardCache cache2 = forward(result.params, net_config, x2);
      const StepResult res = objective_and_grad(
          result.state, Batch(cache1.z, cache2.z), loss_params);
      result.state = res.state;

      ParamGradients grads =
          backward(result.params, net_config, cache1, res.grads.g1);
      accumulate(grads,
                 backward(result.params, net_config, cache2, res.grads.g2));

      const double lr = schedule_lr(step, total_steps, warmup_steps,
                                    train_config.lr_start, train_config.lr_max,
                                    train_config.lr_min);
      sgd_step(result.params, sgd, grads, lr, train_config.momentum,
               train_config.weight_decay);
      ++step;
      last_breakdown = res.breakdown;
      last_lr = lr;
    }

    EpochMetrics m = collect_metrics(result.state, last_breakdown, last_lr);
    m.epoch = epoch;
    result.metrics.push_back(m);
    if (observer) observer(epoch, result.params, result.state, m);
  }
  return result;
}

void save_metrics_csv(const std::string& path,
                      const std::vector<EpochMetrics>& metrics) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("save_metrics_csv: cannot open for writing: " + path);
  file << "epoch,total_loss,big_bang,attraction,ldmi_tracked,min_eig,max_eig,"
          "effective_rank,learning_rate\n";
  char buf[256];
  for (const EpochMetrics& m : metrics) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  m.epoch, m.total_loss, m.big_bang, m.attraction,
                  m.ldmi_tracked, m.min_eig, m.max_eig, m.effective_rank,
                  m.learning_rate);
    file << buf;
  }
  if (!file) throw IoError("save_metrics_csv: write failed: " + path);
}

}  // namespace cimax

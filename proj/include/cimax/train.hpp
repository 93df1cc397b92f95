#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cimax/covtrack.hpp"
#include "cimax/data.hpp"
#include "cimax/loss.hpp"
#include "cimax/net.hpp"

namespace cimax {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double lr_start = 0.003;
  double lr_max = 0.5;
  double lr_min = 1e-6;
  int warmup_epochs = 10;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double forgetting = 0.01;  // covariance tracker lambda for the run
  LossParams loss;
  AugmentConfig augment;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double total_loss = 0.0;
  double big_bang = 0.0;
  double attraction = 0.0;
  double ldmi_tracked = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double effective_rank = 0.0;
  double learning_rate = 0.0;
};

// Linear warmup from lr_start to lr_max over warmup_steps, then cosine decay
// to lr_min over the remaining steps.
double schedule_lr(int step, int total_steps, int warmup_steps,
                   double lr_start, double lr_max, double lr_min);

// Spectrum and loss snapshot of the tracked state; epoch is left for the
// caller to fill. effective_rank is exp of the entropy of the normalized r1
// eigenvalues, 1 for a zero-trace state.
EpochMetrics collect_metrics(const CovarianceState& state,
                             const LossBreakdown& breakdown, double lr);

struct PretrainResult {
  MlpParams params;
  CovarianceState state;
  std::vector<EpochMetrics> metrics;
};

// Called after each epoch with that epoch's metrics, the current parameters,
// and the tracked state; hook for probing snapshots during training.
using EpochObserver = std::function<void(
    int epoch, const MlpParams&, const CovarianceState&, const EpochMetrics&)>;

// Full pretraining loop. Each batch: every sample is augmented into a view
// pair on its own RNG substream keyed by (epoch, column index), both views
// go through the shared net, the loss advances one covariance tracker that
// lives across all epochs, and the two branch gradients accumulate into one
// SGD step at the scheduled learning rate. Partial trailing batches are
// dropped so every update sees batch_size samples. The run-level forgetting
// factor overrides loss.lambda. Deterministic per seed.
PretrainResult pretrain(const Dataset& dataset, const NetConfig& net_config,
                        const TrainConfig& train_config,
                        const EpochObserver& observer = {});

// Comma-separated metrics table, one row per epoch, with the header
// epoch,total_loss,big_bang,attraction,ldmi_tracked,min_eig,max_eig,effective_rank,learning_rate
void save_metrics_csv(const std::string& path,
                      const std::vector<EpochMetrics>& metrics);

}  // namespace cimax

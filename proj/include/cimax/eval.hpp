#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cimax/matrix.hpp"
#include "cimax/net.hpp"

namespace cimax {

// Linear classifier over frozen encoder outputs.
struct ProbeParams {
  Matrix weight;  // num_classes x embedding dim
  Vector bias;    // num_classes
};

// Encoder outputs for samples given as columns of x: the first
// encoder_dims.size() layers only, no augmentation, no projector.
Matrix embed(const MlpParams& params, const NetConfig& cfg, const Matrix& x);

// Multinomial logistic regression by mini-batch SGD with momentum, no
// weight decay, constant learning rate, parameters starting at zero.
// Batches of up to 64 columns are drawn from a fresh shuffle each epoch.
// When epoch_loss is non-null it receives the mean cross-entropy of each
// epoch, measured before that epoch's updates touch each batch.
ProbeParams probe_train(const Matrix& embeddings, const std::vector<int>& labels,
                        int num_classes, int epochs, double lr, double momentum,
                        std::uint64_t seed,
                        std::vector<double>* epoch_loss = nullptr);

// Fraction of columns whose highest logit picks the true class. Ties break
// toward the lowest class index.
double probe_accuracy(const ProbeParams& probe, const Matrix& embeddings,
                      const std::vector<int>& labels);

struct SpectrumReport {
  std::vector<double> eigenvalues;  // descending
  double min_eig = 0.0;
  double max_eig = 0.0;
  double effective_rank = 0.0;
};

// Spectrum diagnostics of a symmetric covariance block.
SpectrumReport spectrum_report(const Matrix& r);

// Appends one result row, writing the header
// run_id,probe_accuracy,min_eig,effective_rank first when the file does not
// exist yet or is empty.
void append_probe_csv(const std::string& path, const std::string& run_id,
                      double accuracy, double min_eig, double eff_rank);

}  // namespace cimax

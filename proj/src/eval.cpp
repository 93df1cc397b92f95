#include "cimax/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cimax/errors.hpp"
#include "cimax/linalg.hpp"
#include "cimax/rng.hpp"

namespace cimax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

Matrix embed(const MlpParams& params, const NetConfig& cfg, const Matrix& x) {
  cfg.validate();
  const int encoder_layers = static_cast<int>(cfg.encoder_dims.size());
  require(params.layer_count() >= encoder_layers,
          "embed: parameter stack shallower than the encoder");
  require(x.rows() == cfg.input_dim,
          "embed: input has " + std::to_string(x.rows()) +
              " rows, config expects " + std::to_string(cfg.input_dim));

  Matrix a = x;
  for (int k = 0; k < encoder_layers; ++k) {
    const Matrix& w = params.weights[static_cast<std::size_t>(k)];
    const Vector& b = params.biases[static_cast<std::size_t>(k)];
    require(w.cols() == a.rows(), "embed: layer " + std::to_string(k) +
                                      " does not accept the running width");
    Matrix next = matmul(w, a);
    for (int i = 0; i < next.rows(); ++i) {
      for (int t = 0; t < next.cols(); ++t) {
        next(i, t) += b[i];
        if (next(i, t) < 0.0) next(i, t) = 0.0;
      }
    }
    a = std::move(next);
  }
  return a;
}

ProbeParams probe_train(const Matrix& embeddings, const std::vector<int>& labels,
                        int num_classes, int epochs, double lr, double momentum,
                        std::uint64_t seed, std::vector<double>* epoch_loss) {
  const int f = embeddings.rows();
  const int m = embeddings.cols();
  require(m > 0 && f > 0, "probe_train: empty embeddings");
  require(static_cast<int>(labels.size()) == m,
          "probe_train: one label per column required");
  require(num_classes >= 2, "probe_train: need at least two classes");
  require(epochs >= 0, "probe_train: epochs must be nonnegative");
  require(lr > 0.0, "probe_train: lr must be positive");
  require(momentum >= 0.0 && momentum < 1.0,
          "probe_train: momentum must lie in [0, 1)");
  std::set<int> distinct;
  for (int label : labels) {
    require(label >= 0 && label < num_classes,
            "probe_train: label outside [0, num_classes)");
    distinct.insert(label);
  }
  require(distinct.size() >= 2,
          "probe_train: labels are degenerate, a single class cannot be fit");

  ProbeParams probe;
  probe.weight = Matrix(num_classes, f);
  probe.bias = Vector(num_classes);
  Matrix vel_w(num_classes, f);
  Vector vel_b(num_classes);
  if (epoch_loss) epoch_loss->clear();

  const int batch = std::min(64, m);
  const Rng base(seed);
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng shuffle = base.derive(0, static_cast<std::uint64_t>(epoch));
    for (int i = m - 1; i > 0; --i) {
      const int j = static_cast<int>(
          shuffle.uniform_index(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }

    double ce_total = 0.0;
    for (int start = 0; start < m; start += batch) {
      const int n = std::min(batch, m - start);
      Matrix grad_w(num_classes, f);
      Vector grad_b(num_classes);
      for (int s = 0; s < n; ++s) {
        const int col = order[static_cast<std::size_t>(start + s)];
        // Logits, stabilized softmax, cross-entropy.
        std::vector<double> logit(static_cast<std::size_t>(num_classes));
        double peak = 0.0;
        for (int c = 0; c < num_classes; ++c) {
          double v = probe.bias[c];
          for (int i = 0; i < f; ++i) v += probe.weight(c, i) * embeddings(i, col);
          logit[static_cast<std::size_t>(c)] = v;
          if (c == 0 || v > peak) peak = v;
        }
        double z = 0.0;
        for (int c = 0; c < num_classes; ++c) {
          logit[static_cast<std::size_t>(c)] =
              std::exp(logit[static_cast<std::size_t>(c)] - peak);
          z += logit[static_cast<std::size_t>(c)];
        }
        const int truth = labels[static_cast<std::size_t>(col)];
        ce_total -= std::log(logit[static_cast<std::size_t>(truth)] / z);
        for (int c = 0; c < num_classes; ++c) {
          const double delta =
              logit[static_cast<std::size_t>(c)] / z - (c == truth ? 1.0 : 0.0);
          for (int i = 0; i < f; ++i) {
            grad_w(c, i) += delta * embeddings(i, col) / n;
          }
          grad_b[c] += delta / n;
        }
      }
      for (std::size_t i = 0; i < grad_w.size(); ++i) {
        vel_w.data()[i] = momentum * vel_w.data()[i] + grad_w.data()[i];
        probe.weight.data()[i] -= lr * vel_w.data()[i];
      }
      for (int c = 0; c < num_classes; ++c) {
        vel_b[c] = momentum * vel_b[c] + grad_b[c];
        probe.bias[c] -= lr * vel_b[c];
      }
    }
    if (epoch_loss) epoch_loss->push_back(ce_total / m);
  }
  return probe;
}

double probe_accuracy(const ProbeParams& probe, const Matrix& embeddings,
                      const std::vector<int>& labels) {
  const int f = embeddings.rows();
  const int m = embeddings.cols();
  const int k = probe.weight.rows();
  require(probe.weight.cols() == f, "probe_accuracy: embedding width mismatch");
  require(probe.bias.size() == k, "probe_accuracy: bias length mismatch");
  require(static_cast<int>(labels.size()) == m,
          "probe_accuracy: one label per column required");

  int correct = 0;
  for (int t = 0; t < m; ++t) {
    int best = 0;
    double best_logit = 0.0;
    for (int c = 0; c < k; ++c) {
      double v = probe.bias[c];
      for (int i = 0; i < f; ++i) v += probe.weight(c, i) * embeddings(i, t);
      if (c == 0 || v > best_logit) {
        best = c;
        best_logit = v;
      }
    }
    if (best == labels[static_cast<std::size_t>(t)]) ++correct;
  }
  return m == 0 ? 0.0 : static_cast<double>(correct) / m;
}

SpectrumReport spectrum_report(const Matrix& r) {
  SpectrumReport report;
  report.eigenvalues = sym_eigenvalues(r);
  report.max_eig = report.eigenvalues.front();
  report.min_eig = report.eigenvalues.back();
  report.effective_rank = effective_rank(report.eigenvalues);
  return report;
}

void append_probe_csv(const std::string& path, const std::string& run_id,
                      double accuracy, double min_eig, double eff_rank) {
  bool need_header = true;
  {
    std::ifstream probe_file(path);
    if (probe_file && probe_file.peek() != std::ifstream::traits_type::eof()) {
      need_header = false;
    }
  }
  std::ofstream file(path, std::ios::app);
  if (!file) throw IoError("append_probe_csv: cannot open for append: " + path);
  if (need_header) file << "run_id,probe_accuracy,min_eig,effective_rank\n";
  char buf[192];
  std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g\n", run_id.c_str(),
                accuracy, min_eig, eff_rank);
  file << buf;
  if (!file) throw IoError("append_probe_csv: write failed: " + path);
}

}  // namespace cimax

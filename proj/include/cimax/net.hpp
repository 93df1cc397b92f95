#pragma once

#include <string>
#include <vector>

#include "cimax/matrix.hpp"
#include "cimax/rng.hpp"

namespace cimax {

// Architecture of the weight-shared encoder + projector stack. Every layer
// is fully connected; encoder layers and projector hidden layers apply
// ReLU, the final projector layer is linear and its output is L2-normalized
// per sample column.
struct NetConfig {
  int input_dim = 0;
  std::vector<int> encoder_dims;    // e.g. {64, 64}
  std::vector<int> projector_dims;  // e.g. {64, 16}

  int layer_count() const {
    return static_cast<int>(encoder_dims.size() + projector_dims.size());
  }
  int embedding_dim() const { return encoder_dims.back(); }
  int projector_dim() const { return projector_dims.back(); }

  // input_dim followed by every layer's output width.
  std::vector<int> layer_dims() const;

  void validate() const;
};

struct MlpParams {
  std::vector<Matrix> weights;  // out x in, one per layer
  std::vector<Vector> biases;

  int layer_count() const { return static_cast<int>(weights.size()); }
};

// He-uniform weights, U(-b, b) with b = sqrt(6 / fan_in), zero biases.
MlpParams init_params(const NetConfig& cfg, Rng& rng);

// Everything backward needs: the input and each layer's output, plus the
// pre-normalization projector output and its normalized form.
struct ForwardCache {
  std::vector<Matrix> activations;  // activations[0] = x, then one per layer
  Matrix z_pre;
  Matrix z;

  // Encoder output (the representation evaluation probes).
  const Matrix& embedding(const NetConfig& cfg) const {
    return activations[cfg.encoder_dims.size()];
  }
};

ForwardCache forward(const MlpParams& params, const NetConfig& cfg,
                     const Matrix& x);

// Gradient of the normalization map alone: given columns z = z_pre/|z_pre|
// and upstream dL/dz, returns dL/dz_pre = (g - z (z^T g)) / |z_pre| per
// column.
Matrix l2_normalize_backward(const Matrix& z_pre, const Matrix& z,
                             const Matrix& g_z);

struct ParamGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Backpropagation of dL/dz through normalization and all layers. The batch
// scaling convention is the caller's: gradients are plain sums over sample
// columns.
ParamGradients backward(const MlpParams& params, const NetConfig& cfg,
                        const ForwardCache& cache, const Matrix& g_z);

// a += b, shape-checked; used to merge the two branch contributions of the
// shared weights.
void accumulate(ParamGradients& a, const ParamGradients& b);

// Momentum SGD: v <- momentum v + (grad + weight_decay w); w <- w - lr v.
struct SgdState {
  std::vector<Matrix> weight_velocity;
  std::vector<Vector> bias_velocity;
};

SgdState init_sgd(const MlpParams& params);

void sgd_step(MlpParams& params, SgdState& momentum_state,
              const ParamGradients& grads, double lr, double momentum,
              double weight_decay);

// ========================= checkpoint format =============================
// Binary, little-endian:
//   bytes 0..3   magic "CIMX"
//   u32          format version (currently 1)
//   u32          layer count L
//   L x (u32, u32)  per-layer (out, in)
//   L x          weight matrix (out*in f64, row-major) then bias (out f64)
//   u64          checksum: sum of all preceding bytes mod 2^64
// Throws IoError on unreadable files, bad magic, unknown version, size
// mismatch, or checksum mismatch.

void save_checkpoint(const std::string& path, const MlpParams& params);
MlpParams load_checkpoint(const std::string& path);

}  // namespace cimax

#include "cimax/net.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "cimax/errors.hpp"

namespace cimax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_consistent(const MlpParams& params, const NetConfig& cfg) {
  cfg.validate();
  const auto dims = cfg.layer_dims();
  require(params.layer_count() == cfg.layer_count(),
          "net: parameter stack has " + std::to_string(params.layer_count()) +
              " layers, config expects " + std::to_string(cfg.layer_count()));
  for (int k = 0; k < params.layer_count(); ++k) {
    const auto& w = params.weights[static_cast<std::size_t>(k)];
    require(w.rows() == dims[static_cast<std::size_t>(k) + 1] &&
                w.cols() == dims[static_cast<std::size_t>(k)],
            "net: layer " + std::to_string(k) + " weight shape mismatch");
    require(params.biases[static_cast<std::size_t>(k)].size() == w.rows(),
            "net: layer " + std::to_string(k) + " bias length mismatch");
  }
}

}  // namespace

std::vector<int> NetConfig::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), encoder_dims.begin(), encoder_dims.end());
  dims.insert(dims.end(), projector_dims.begin(), projector_dims.end());
  return dims;
}

void NetConfig::validate() const {
  require(input_dim > 0, "NetConfig: input_dim must be positive");
  require(!encoder_dims.empty(), "NetConfig: encoder needs at least one layer");
  require(!projector_dims.empty(),
          "NetConfig: projector needs at least one layer");
  for (int d : layer_dims()) {
    require(d > 0, "NetConfig: layer widths must be positive");
  }
}

MlpParams init_params(const NetConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto dims = cfg.layer_dims();
  MlpParams params;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int fan_in = dims[k], fan_out = dims[k + 1];
    const double bound = std::sqrt(6.0 / fan_in);
    Matrix w(fan_out, fan_in);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.data()[i] = rng.uniform(-bound, bound);
    }
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(fan_out);
  }
  return params;
}

ForwardCache forward(const MlpParams& params, const NetConfig& cfg,
                     const Matrix& x) {
  require_consistent(params, cfg);
  require(x.rows() == cfg.input_dim,
          "forward: input has " + std::to_string(x.rows()) +
              " rows, config expects " + std::to_string(cfg.input_dim));
  require(x.cols() > 0, "forward: empty batch");

  ForwardCache cache;
  cache.activations.reserve(static_cast<std::size_t>(cfg.layer_count()) + 1);
  cache.activations.push_back(x);
  const int last = cfg.layer_count() - 1;
  for (int k = 0; k <= last; ++k) {
    const Matrix& w = params.weights[static_cast<std::size_t>(k)];
    const Vector& b = params.biases[static_cast<std::size_t>(k)];
    Matrix a = matmul(w, cache.activations.back());
    for (int i = 0; i < a.rows(); ++i) {
      for (int t = 0; t < a.cols(); ++t) {
        a(i, t) += b[i];
        if (k != last && a(i, t) < 0.0) a(i, t) = 0.0;
      }
    }
    cache.activations.push_back(std::move(a));
  }

  cache.z_pre = cache.activations.back();
  cache.z = cache.z_pre;
  for (int t = 0; t < cache.z.cols(); ++t) {
    double norm = 0.0;
    for (int i = 0; i < cache.z.rows(); ++i) {
      norm += cache.z_pre(i, t) * cache.z_pre(i, t);
    }
    // Tiny floor in the spirit of the usual normalize implementations: a
    // zero column stays zero instead of dividing by zero.
    norm = std::max(std::sqrt(norm), 1e-12);
    for (int i = 0; i < cache.z.rows(); ++i) cache.z(i, t) /= norm;
  }
  return cache;
}

Matrix l2_normalize_backward(const Matrix& z_pre, const Matrix& z,
                             const Matrix& g_z) {
  require(z_pre.rows() == z.rows() && z_pre.cols() == z.cols() &&
              z.rows() == g_z.rows() && z.cols() == g_z.cols(),
          "l2_normalize_backward: shape mismatch");
  Matrix g(z.rows(), z.cols());
  for (int t = 0; t < z.cols(); ++t) {
    double norm = 0.0, inner = 0.0;
    for (int i = 0; i < z.rows(); ++i) {
      norm += z_pre(i, t) * z_pre(i, t);
      inner += z(i, t) * g_z(i, t);
    }
    norm = std::max(std::sqrt(norm), 1e-12);
    for (int i = 0; i < z.rows(); ++i) {
      g(i, t) = (g_z(i, t) - z(i, t) * inner) / norm;
    }
  }
  return g;
}

ParamGradients backward(const MlpParams& params, const NetConfig& cfg,
                        const ForwardCache& cache, const Matrix& g_z) {
  require_consistent(params, cfg);
  require(static_cast<int>(cache.activations.size()) == cfg.layer_count() + 1,
          "backward: cache does not match config");

  ParamGradients grads;
  grads.weights.resize(static_cast<std::size_t>(cfg.layer_count()));
  grads.biases.resize(static_cast<std::size_t>(cfg.layer_count()));

  Matrix g = l2_normalize_backward(cache.z_pre, cache.z, g_z);
  for (int k = cfg.layer_count() - 1; k >= 0; --k) {
    const Matrix& out = cache.activations[static_cast<std::size_t>(k) + 1];
    // Hidden layers store post-ReLU outputs; a zero output means the unit
    // was clamped and passes no gradient. The last layer is linear.
    if (k != cfg.layer_count() - 1) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (out.data()[i] <= 0.0) g.data()[i] = 0.0;
      }
    }
    const Matrix& in = cache.activations[static_cast<std::size_t>(k)];
    grads.weights[static_cast<std::size_t>(k)] = matmul(g, transpose(in));
    Vector bias_grad(g.rows());
    for (int i = 0; i < g.rows(); ++i) {
      double s = 0.0;
      for (int t = 0; t < g.cols(); ++t) s += g(i, t);
      bias_grad[i] = s;
    }
    grads.biases[static_cast<std::size_t>(k)] = std::move(bias_grad);
    if (k > 0) {
      g = matmul(transpose(params.weights[static_cast<std::size_t>(k)]), g);
    }
  }
  return grads;
}

void accumulate(ParamGradients& a, const ParamGradients& b) {
  require(a.weights.size() == b.weights.size(),
          "accumulate: gradient stacks differ in depth");
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    a.weights[k] = a.weights[k] + b.weights[k];
    a.biases[k] = a.biases[k] + b.biases[k];
  }
}

SgdState init_sgd(const MlpParams& params) {
  SgdState s;
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    s.weight_velocity.emplace_back(params.weights[k].rows(),
                                   params.weights[k].cols());
    s.bias_velocity.emplace_back(params.biases[k].size());
  }
  return s;
}

void sgd_step(MlpParams& params, SgdState& momentum_state,
              const ParamGradients& grads, double lr, double momentum,
              double weight_decay) {
  require(lr > 0.0, "sgd_step: lr must be positive");
  require(momentum >= 0.0 && momentum < 1.0,
          "sgd_step: momentum must lie in [0, 1)");
  require(weight_decay >= 0.0, "sgd_step: weight_decay must be nonnegative");
  require(grads.weights.size() == params.weights.size() &&
              momentum_state.weight_velocity.size() == params.weights.size(),
          "sgd_step: stack depth mismatch");
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    Matrix& w = params.weights[k];
    Matrix& vw = momentum_state.weight_velocity[k];
    const Matrix& gw = grads.weights[k];
    require(w.rows() == gw.rows() && w.cols() == gw.cols(),
            "sgd_step: weight gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      vw.data()[i] =
          momentum * vw.data()[i] + (gw.data()[i] + weight_decay * w.data()[i]);
      w.data()[i] -= lr * vw.data()[i];
    }
    Vector& b = params.biases[k];
    Vector& vb = momentum_state.bias_velocity[k];
    const Vector& gb = grads.biases[k];
    require(b.size() == gb.size(), "sgd_step: bias gradient length mismatch");
    for (int i = 0; i < b.size(); ++i) {
      vb[i] = momentum * vb[i] + (gb[i] + weight_decay * b[i]);
      b[i] -= lr * vb[i];
    }
  }
}

// ========================= checkpoint format =============================

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::size_t limit)
      : bytes_(bytes), limit_(limit) {}

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  }

  std::size_t position() const { return pos_; }

 private:
  unsigned char byte() {
    if (pos_ >= limit_) throw IoError("checkpoint: truncated file");
    return static_cast<unsigned char>(bytes_[pos_++]);
  }

  const std::string& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

std::uint64_t byte_sum(const std::string& bytes, std::size_t count) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < count; ++i) {
    sum += static_cast<unsigned char>(bytes[i]);
  }
  return sum;
}

constexpr char kMagic[4] = {'C', 'I', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const MlpParams& params) {
  if (params.layer_count() == 0) {
    throw std::invalid_argument("save_checkpoint: empty parameter stack");
  }
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(params.layer_count()));
  for (int k = 0; k < params.layer_count(); ++k) {
    const Matrix& w = params.weights[static_cast<std::size_t>(k)];
    put_u32(out, static_cast<std::uint32_t>(w.rows()));
    put_u32(out, static_cast<std::uint32_t>(w.cols()));
  }
  for (int k = 0; k < params.layer_count(); ++k) {
    const Matrix& w = params.weights[static_cast<std::size_t>(k)];
    const Vector& b = params.biases[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < w.size(); ++i) put_f64(out, w.data()[i]);
    for (int i = 0; i < b.size(); ++i) put_f64(out, b[i]);
  }
  put_u64(out, byte_sum(out, out.size()));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("checkpoint: cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("checkpoint: write failed: " + path);
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("checkpoint: cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());
  if (file.bad()) throw IoError("checkpoint: read failed: " + path);
  if (bytes.size() < 8 + 8) throw IoError("checkpoint: truncated file");

  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("checkpoint: bad magic, not a CIMX file");
  }
  std::uint64_t declared = 0;
  for (int i = 0; i < 8; ++i) {
    declared |= static_cast<std::uint64_t>(static_cast<unsigned char>(
                    bytes[bytes.size() - 8 + static_cast<std::size_t>(i)]))
                << (8 * i);
  }
  if (byte_sum(bytes, bytes.size() - 8) != declared) {
    throw IoError("checkpoint: checksum mismatch");
  }

  ByteReader reader(bytes, bytes.size() - 8);
  reader.u32();  // magic, verified above
  const std::uint32_t version = reader.u32();
  if (version != kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t layers = reader.u32();
  if (layers == 0 || layers > 1024) {
    throw IoError("checkpoint: implausible layer count " +
                  std::to_string(layers));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
  for (std::uint32_t k = 0; k < layers; ++k) {
    const std::uint32_t out_dim = reader.u32();
    const std::uint32_t in_dim = reader.u32();
    if (out_dim == 0 || in_dim == 0 || out_dim > 1u << 20 || in_dim > 1u << 20) {
      throw IoError("checkpoint: implausible layer shape");
    }
    shapes.emplace_back(out_dim, in_dim);
  }

  MlpParams params;
  for (const auto& [out_dim, in_dim] : shapes) {
    std::vector<double> values(static_cast<std::size_t>(out_dim) * in_dim);
    for (double& v : values) v = reader.f64();
    std::vector<double> bias(out_dim);
    for (double& v : bias) v = reader.f64();
    try {
      params.weights.emplace_back(static_cast<int>(out_dim),
                                  static_cast<int>(in_dim), std::move(values));
      params.biases.emplace_back(std::move(bias));
    } catch (const std::invalid_argument& e) {
      throw IoError(std::string("checkpoint: ") + e.what());
    }
  }
  if (reader.position() != bytes.size() - 8) {
    throw IoError("checkpoint: trailing bytes after parameters");
  }
  return params;
}

}  // namespace cimax

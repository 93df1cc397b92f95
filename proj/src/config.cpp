#include "cimax/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cimax/errors.hpp"

namespace cimax {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ConfigError(origin + ": " + message);
}

double to_real(const std::string& value, const std::string& key,
               const std::string& origin) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      !std::isfinite(v)) {
    fail(origin, "value '" + value + "' for " + key + " is not a number");
  }
  return v;
}

long long to_int(const std::string& value, const std::string& key,
                 const std::string& origin) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    fail(origin, "value '" + value + "' for " + key + " is not an integer");
  }
  return v;
}

std::uint64_t to_seed(const std::string& value, const std::string& key,
                      const std::string& origin) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos) {
    fail(origin, "value '" + value + "' for " + key +
                     " is not a nonnegative integer");
  }
  return v;
}

bool to_flag(const std::string& value, const std::string& key,
             const std::string& origin) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(origin, "value '" + value + "' for " + key + " is not true/false");
}

std::vector<int> to_dims(const std::string& value, const std::string& key,
                         const std::string& origin) {
  std::vector<int> dims;
  std::istringstream in(value);
  std::string token;
  while (in >> token) {
    const long long d = to_int(token, key, origin);
    if (d < 1 || d > 100000) {
      fail(origin, key + " entries must be positive layer widths");
    }
    dims.push_back(static_cast<int>(d));
  }
  if (dims.empty()) fail(origin, key + " needs at least one layer width");
  return dims;
}

void check(bool ok, const std::string& origin, const std::string& message) {
  if (!ok) fail(origin, message);
}

}  // namespace

NetConfig RunConfig::net_config() const {
  NetConfig cfg;
  cfg.input_dim = input_dim;
  cfg.encoder_dims = encoder_dims;
  cfg.projector_dims = projector_dims;
  return cfg;
}

void RunConfig::validate() const {
  net_config().validate();
  train.validate();
  if (probe_epochs < 0) throw ConfigError("probe_epochs must be nonnegative");
  if (probe_lr <= 0.0) throw ConfigError("probe_lr must be positive");
  if (probe_holdout < 0.0 || probe_holdout >= 1.0) {
    throw ConfigError("probe_holdout must lie in [0, 1)");
  }
  if (num_classes < 1 || per_class < 1) {
    throw ConfigError("num_classes and per_class must be positive");
  }
  if (separation <= 0.0 || within_std < 0.0) {
    throw ConfigError("separation must be positive, within_std nonnegative");
  }
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

void apply_config_entry(RunConfig& c, const std::string& entry,
                        const std::string& origin) {
  const std::size_t eq = entry.find('=');
  if (eq == std::string::npos) {
    fail(origin, "expected key = value, got '" + trim(entry) + "'");
  }
  const std::string key = trim(entry.substr(0, eq));
  const std::string value = trim(entry.substr(eq + 1));
  if (key.empty()) fail(origin, "missing key before '='");
  if (value.empty()) fail(origin, "missing value for " + key);

  // dataset
  if (key == "num_classes") {
    const long long v = to_int(value, key, origin);
    check(v >= 1 && v <= 4096, origin, "num_classes must lie in [1, 4096]");
    c.num_classes = static_cast<int>(v);
  } else if (key == "per_class") {
    const long long v = to_int(value, key, origin);
    check(v >= 1 && v <= 10000000, origin, "per_class must be positive");
    c.per_class = static_cast<int>(v);
  } else if (key == "input_dim") {
    const long long v = to_int(value, key, origin);
    check(v >= 1 && v <= 100000, origin, "input_dim must be positive");
    c.input_dim = static_cast<int>(v);
  } else if (key == "separation") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "separation must be positive");
    c.separation = v;
  } else if (key == "within_std") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0, origin, "within_std must be nonnegative");
    c.within_std = v;
  } else if (key == "data_seed") {
    c.data_seed = to_seed(value, key, origin);

    // architecture
  } else if (key == "encoder_dims") {
    c.encoder_dims = to_dims(value, key, origin);
  } else if (key == "projector_dims") {
    c.projector_dims = to_dims(value, key, origin);

    // optimization
  } else if (key == "epochs") {
    const long long v = to_int(value, key, origin);
    check(v >= 0, origin, "epochs must be nonnegative");
    c.train.epochs = static_cast<int>(v);
  } else if (key == "batch_size") {
    const long long v = to_int(value, key, origin);
    check(v >= 1, origin, "batch_size must be positive");
    c.train.batch_size = static_cast<int>(v);
  } else if (key == "lr_start") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "lr_start must be positive");
    c.train.lr_start = v;
  } else if (key == "lr_max") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "lr_max must be positive");
    c.train.lr_max = v;
  } else if (key == "lr_min") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "lr_min must be positive");
    c.train.lr_min = v;
  } else if (key == "warmup_epochs") {
    const long long v = to_int(value, key, origin);
    check(v >= 0, origin, "warmup_epochs must be nonnegative");
    c.train.warmup_epochs = static_cast<int>(v);
  } else if (key == "momentum") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0 && v < 1.0, origin, "momentum must lie in [0, 1)");
    c.train.momentum = v;
  } else if (key == "weight_decay") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0, origin, "weight_decay must be nonnegative");
    c.train.weight_decay = v;
  } else if (key == "seed") {
    c.train.seed = to_seed(value, key, origin);

    // loss
  } else if (key == "alpha") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0, origin, "alpha must be nonnegative");
    c.train.loss.alpha = v;
  } else if (key == "lambda") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0 && v < 1.0, origin, "lambda must lie in [0, 1)");
    c.train.forgetting = v;
    c.train.loss.lambda = v;
  } else if (key == "eps") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "eps must be positive");
    c.train.loss.eps = v;
  } else if (key == "dim_normalize") {
    c.train.loss.dim_normalize = to_flag(value, key, origin);
  } else if (key == "bigbang_enabled") {
    c.train.loss.bigbang_enabled = to_flag(value, key, origin);
  } else if (key == "bigbang_grad") {
    if (value == "exact") {
      c.train.loss.bigbang_grad = BigBangGrad::exact;
    } else if (value == "halved") {
      c.train.loss.bigbang_grad = BigBangGrad::halved;
    } else {
      fail(origin, "bigbang_grad must be 'exact' or 'halved'");
    }

    // augmentation
  } else if (key == "rotate_pairs") {
    const long long v = to_int(value, key, origin);
    check(v >= 0, origin, "rotate_pairs must be nonnegative");
    c.train.augment.rotate_pairs = static_cast<int>(v);
  } else if (key == "max_angle") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0, origin, "max_angle must be nonnegative");
    c.train.augment.max_angle = v;
  } else if (key == "scale_low") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "scale_low must be positive");
    c.train.augment.scale_low = v;
  } else if (key == "scale_high") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "scale_high must be positive");
    c.train.augment.scale_high = v;
  } else if (key == "mask_prob") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0 && v < 1.0, origin, "mask_prob must lie in [0, 1)");
    c.train.augment.mask_prob = v;
  } else if (key == "noise_std") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0, origin, "noise_std must be nonnegative");
    c.train.augment.noise_std = v;

    // probe
  } else if (key == "probe_epochs") {
    const long long v = to_int(value, key, origin);
    check(v >= 0, origin, "probe_epochs must be nonnegative");
    c.probe_epochs = static_cast<int>(v);
  } else if (key == "probe_lr") {
    const double v = to_real(value, key, origin);
    check(v > 0.0, origin, "probe_lr must be positive");
    c.probe_lr = v;
  } else if (key == "probe_holdout") {
    const double v = to_real(value, key, origin);
    check(v >= 0.0 && v < 1.0, origin, "probe_holdout must lie in [0, 1)");
    c.probe_holdout = v;
  } else if (key == "probe_seed") {
    c.probe_seed = to_seed(value, key, origin);

    // artifacts
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else if (key == "run_id") {
    c.run_id = value;

  } else {
    fail(origin, "unknown key '" + key + "'");
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file: " + path);

  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    apply_config_entry(config, line, path + ":" + std::to_string(line_no));
  }
  if (file.bad()) throw ConfigError("read failed: " + path);
  return config;
}

namespace {

std::string real_str(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dims_str(const std::vector<int>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(dims[i]);
  }
  return out;
}

}  // namespace

std::string dump_config(const RunConfig& c) {
  std::ostringstream out;
  out << "# dataset\n"
      << "num_classes = " << c.num_classes << "\n"
      << "per_class = " << c.per_class << "\n"
      << "input_dim = " << c.input_dim << "\n"
      << "separation = " << real_str(c.separation) << "\n"
      << "within_std = " << real_str(c.within_std) << "\n"
      << "data_seed = " << c.data_seed << "\n"
      << "\n# architecture\n"
      << "encoder_dims = " << dims_str(c.encoder_dims) << "\n"
      << "projector_dims = " << dims_str(c.projector_dims) << "\n"
      << "\n# optimization\n"
      << "epochs = " << c.train.epochs << "\n"
      << "batch_size = " << c.train.batch_size << "\n"
      << "lr_start = " << real_str(c.train.lr_start) << "\n"
      << "lr_max = " << real_str(c.train.lr_max) << "\n"
      << "lr_min = " << real_str(c.train.lr_min) << "\n"
      << "warmup_epochs = " << c.train.warmup_epochs << "\n"
      << "momentum = " << real_str(c.train.momentum) << "\n"
      << "weight_decay = " << real_str(c.train.weight_decay) << "\n"
      << "seed = " << c.train.seed << "\n"
      << "\n# loss\n"
      << "alpha = " << real_str(c.train.loss.alpha) << "\n"
      << "lambda = " << real_str(c.train.forgetting) << "\n"
      << "eps = " << real_str(c.train.loss.eps) << "\n"
      << "dim_normalize = " << (c.train.loss.dim_normalize ? "true" : "false")
      << "\n"
      << "bigbang_enabled = "
      << (c.train.loss.bigbang_enabled ? "true" : "false") << "\n"
      << "bigbang_grad = "
      << (c.train.loss.bigbang_grad == BigBangGrad::exact ? "exact" : "halved")
      << "\n"
      << "\n# augmentation\n"
      << "rotate_pairs = " << c.train.augment.rotate_pairs << "\n"
      << "max_angle = " << real_str(c.train.augment.max_angle) << "\n"
      << "scale_low = " << real_str(c.train.augment.scale_low) << "\n"
      << "scale_high = " << real_str(c.train.augment.scale_high) << "\n"
      << "mask_prob = " << real_str(c.train.augment.mask_prob) << "\n"
      << "noise_std = " << real_str(c.train.augment.noise_std) << "\n"
      << "\n# probe\n"
      << "probe_epochs = " << c.probe_epochs << "\n"
      << "probe_lr = " << real_str(c.probe_lr) << "\n"
      << "probe_holdout = " << real_str(c.probe_holdout) << "\n"
      << "probe_seed = " << c.probe_seed << "\n"
      << "\n# artifacts\n"
      << "out_dir = " << c.out_dir << "\n"
      << "run_id = " << c.run_id << "\n";
  return out.str();
}

}  // namespace cimax

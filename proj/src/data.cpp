#include "cimax/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cimax/errors.hpp"

namespace cimax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void Dataset::validate() const {
  require(features.rows() > 0 && features.cols() > 0, "Dataset: empty features");
  require(static_cast<int>(labels.size()) == features.cols(),
          "Dataset: one label per sample column required");
  require(num_classes > 0, "Dataset: num_classes must be positive");
  require(features.cols() >= num_classes,
          "Dataset: fewer samples than classes");
  for (int label : labels) {
    require(label >= 0 && label < num_classes,
            "Dataset: label " + std::to_string(label) + " outside [0, " +
                std::to_string(num_classes) + ")");
  }
}

void AugmentConfig::validate() const {
  require(rotate_pairs >= 0, "AugmentConfig: rotate_pairs must be nonnegative");
  require(std::isfinite(max_angle) && max_angle >= 0.0,
          "AugmentConfig: max_angle must be finite and nonnegative");
  require(scale_low > 0.0 && scale_high >= scale_low,
          "AugmentConfig: scale range must satisfy 0 < low <= high");
  require(mask_prob >= 0.0 && mask_prob < 1.0,
          "AugmentConfig: mask_prob must lie in [0, 1)");
  require(noise_std >= 0.0, "AugmentConfig: noise_std must be nonnegative");
}

Dataset gen_blobs(int num_classes, int per_class, int d_in, double separation,
                  double within_std, std::uint64_t seed) {
  require(num_classes > 0, "gen_blobs: num_classes must be positive");
  require(per_class > 0, "gen_blobs: per_class must be positive");
  require(d_in > 0, "gen_blobs: d_in must be positive");
  require(separation > 0.0, "gen_blobs: separation must be positive");
  require(within_std >= 0.0, "gen_blobs: within_std must be nonnegative");

  Rng rng(seed);

  // Unit anchor directions with pairwise angle >= 60 degrees, i.e. pairwise
  // dot products <= cos(60 deg) = 0.5, by rejection.
  std::vector<Vector> anchors;
  const int max_tries = 10000;
  int tries = 0;
  while (static_cast<int>(anchors.size()) < num_classes) {
    if (++tries > max_tries) {
      throw std::runtime_error(
          "gen_blobs: could not place " + std::to_string(num_classes) +
          " anchors with 60 degree separation in dimension " +
          std::to_string(d_in) + " after " + std::to_string(max_tries) +
          " tries");
    }
    Vector candidate = gaussian_vector(d_in, rng);
    const double norm = norm2(candidate);
    if (norm < 1e-12) continue;
    for (int i = 0; i < candidate.size(); ++i) candidate[i] /= norm;
    bool separated = true;
    for (const Vector& anchor : anchors) {
      double dot = 0.0;
      for (int i = 0; i < d_in; ++i) dot += anchor[i] * candidate[i];
      if (dot > 0.5) {
        separated = false;
        break;
      }
    }
    if (separated) anchors.push_back(std::move(candidate));
  }

  Dataset ds;
  ds.num_classes = num_classes;
  ds.features = Matrix(d_in, num_classes * per_class);
  ds.labels.reserve(static_cast<std::size_t>(num_classes) * per_class);
  int col = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int s = 0; s < per_class; ++s, ++col) {
      for (int i = 0; i < d_in; ++i) {
        ds.features(i, col) =
            separation * anchors[static_cast<std::size_t>(c)][i] +
            within_std * rng.normal();
      }
      ds.labels.push_back(c);
    }
  }
  ds.validate();
  return ds;
}

// ============================= flat tables ===============================

namespace {

double parse_real(const std::string& field, int line_no) {
  errno = 0;
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(value)) {
    throw IoError("load_table: bad numeric field '" + field + "' at line " +
                  std::to_string(line_no));
  }
  return value;
}

int parse_label(const std::string& field, int line_no) {
  errno = 0;
  const char* begin = field.c_str();
  char* end = nullptr;
  const long value = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE || value < 0 ||
      value > 1000000) {
    throw IoError("load_table: bad label field '" + field + "' at line " +
                  std::to_string(line_no));
  }
  return static_cast<int>(value);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

Dataset load_table(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("load_table: cannot open: " + path);

  std::vector<std::vector<double>> rows;  // per sample
  std::vector<int> labels;
  std::size_t width = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 2) {
      throw IoError("load_table: line " + std::to_string(line_no) +
                    " needs at least one feature and a label");
    }
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw IoError("load_table: ragged row at line " + std::to_string(line_no) +
                    ": expected " + std::to_string(width) + " fields, got " +
                    std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(width - 1);
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
      values.push_back(parse_real(fields[i], line_no));
    }
    labels.push_back(parse_label(fields.back(), line_no));
    rows.push_back(std::move(values));
  }
  if (file.bad()) throw IoError("load_table: read failed: " + path);
  if (rows.empty()) throw IoError("load_table: empty file: " + path);

  const int d = static_cast<int>(width) - 1;
  const int m = static_cast<int>(rows.size());
  Dataset ds;
  ds.features = Matrix(d, m);
  for (int t = 0; t < m; ++t) {
    for (int i = 0; i < d; ++i) {
      ds.features(i, t) = rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    }
  }
  ds.labels = std::move(labels);
  ds.num_classes = 1 + *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.validate();
  return ds;
}

void save_table(const std::string& path, const Dataset& dataset) {
  dataset.validate();
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("save_table: cannot open for writing: " + path);
  char buf[64];
  for (int t = 0; t < dataset.size(); ++t) {
    std::string line;
    for (int i = 0; i < dataset.dim(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.features(i, t));
      line += buf;
      line += ',';
    }
    line += std::to_string(dataset.labels[static_cast<std::size_t>(t)]);
    line += '\n';
    file << line;
  }
  if (!file) throw IoError("save_table: write failed: " + path);
}

// ============================ augmentation ===============================

namespace {

Vector augment_one(const Vector& x, const AugmentConfig& cfg, Rng& rng) {
  const int d = x.size();
  Vector v = x;
  for (int r = 0; r < cfg.rotate_pairs; ++r) {
    const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d)));
    int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d - 1)));
    if (j >= i) ++j;
    const double angle = rng.uniform(-cfg.max_angle, cfg.max_angle);
    const double c = std::cos(angle), s = std::sin(angle);
    const double vi = v[i], vj = v[j];
    v[i] = c * vi - s * vj;
    v[j] = s * vi + c * vj;
  }
  const double scale = rng.uniform(cfg.scale_low, cfg.scale_high);
  for (int i = 0; i < d; ++i) v[i] *= scale;
  for (int i = 0; i < d; ++i) {
    if (rng.uniform() < cfg.mask_prob) v[i] = 0.0;
  }
  for (int i = 0; i < d; ++i) v[i] += cfg.noise_std * rng.normal();
  return v;
}

}  // namespace

std::pair<Vector, Vector> augment_pair(const Vector& x,
                                       const AugmentConfig& config1,
                                       const AugmentConfig& config2, Rng& rng) {
  config1.validate();
  config2.validate();
  require(x.size() > 0, "augment_pair: empty input");
  require((config1.rotate_pairs == 0 && config2.rotate_pairs == 0) || x.size() >= 2,
          "augment_pair: plane rotations need at least two coordinates");
  Vector x1 = augment_one(x, config1, rng);
  Vector x2 = augment_one(x, config2, rng);
  return {std::move(x1), std::move(x2)};
}

std::pair<Vector, Vector> augment_pair(const Vector& x,
                                       const AugmentConfig& config, Rng& rng) {
  return augment_pair(x, config, config, rng);
}

// =============================== batching ================================

std::vector<std::vector<int>> batches(const Dataset& dataset, int n,
                                      std::uint64_t seed, bool drop_last) {
  const int m = dataset.size();
  require(n >= 1, "batches: batch size must be at least 1");
  require(n <= m, "batches: batch size " + std::to_string(n) +
                      " exceeds dataset size " + std::to_string(m));

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = m - 1; i > 0; --i) {
    const int j = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  std::vector<std::vector<int>> result;
  for (int start = 0; start < m; start += n) {
    const int stop = std::min(start + n, m);
    if (stop - start < n && drop_last) break;
    result.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return result;
}

}  // namespace cimax

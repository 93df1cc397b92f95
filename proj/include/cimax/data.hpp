#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cimax/matrix.hpp"
#include "cimax/rng.hpp"

namespace cimax {

// Feature dataset with samples as columns.
struct Dataset {
  Matrix features;          // d_in x m_total
  std::vector<int> labels;  // one class id per column
  int num_classes = 0;

  int dim() const { return features.rows(); }
  int size() const { return features.cols(); }

  // Labels in [0, num_classes), one per column, at least one sample per
  // possible class id overall.
  void validate() const;
};

// Per-branch view transformation: random coordinate-plane rotations, then a
// global scale, then coordinate masking, then additive Gaussian noise.
struct AugmentConfig {
  int rotate_pairs = 0;
  double max_angle = 0.0;     // radians, rotation angles U(-max_angle, max_angle)
  double scale_low = 1.0;
  double scale_high = 1.0;
  double mask_prob = 0.0;     // per-coordinate zeroing probability
  double noise_std = 0.0;

  void validate() const;
};

// Gaussian class blobs around anchors of length `separation` whose pairwise
// angles are at least 60 degrees, found by rejection sampling. Columns are
// ordered class by class, per_class samples each.
Dataset gen_blobs(int num_classes, int per_class, int d_in, double separation,
                  double within_std, std::uint64_t seed);

// Flat text table, one sample per line: comma-separated feature values with
// an integer class label as the last field. Values render with 17
// significant digits so a save/load round trip is exact.
Dataset load_table(const std::string& path);
void save_table(const std::string& path, const Dataset& dataset);

// Two independently augmented views of one sample. The asymmetric overload
// applies a different config per branch.
std::pair<Vector, Vector> augment_pair(const Vector& x,
                                       const AugmentConfig& config, Rng& rng);
std::pair<Vector, Vector> augment_pair(const Vector& x,
                                       const AugmentConfig& config1,
                                       const AugmentConfig& config2, Rng& rng);

// Random permutation of column indices split into size-n batches. A final
// partial batch is kept unless drop_last.
std::vector<std::vector<int>> batches(const Dataset& dataset, int n,
                                      std::uint64_t seed, bool drop_last);

}  // namespace cimax

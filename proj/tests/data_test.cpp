#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "cimax/data.hpp"
#include "cimax/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cimax;

namespace {

// Classify every sample by its nearest class mean; the straightforward
// quadratic-time oracle.
double centroid_accuracy(const Dataset& ds) {
  Matrix centroids(ds.dim(), ds.num_classes);
  std::vector<int> counts(static_cast<std::size_t>(ds.num_classes), 0);
  for (int t = 0; t < ds.size(); ++t) {
    const int c = ds.labels[static_cast<std::size_t>(t)];
    ++counts[static_cast<std::size_t>(c)];
    for (int i = 0; i < ds.dim(); ++i) centroids(i, c) += ds.features(i, t);
  }
  for (int c = 0; c < ds.num_classes; ++c) {
    for (int i = 0; i < ds.dim(); ++i) {
      centroids(i, c) /= counts[static_cast<std::size_t>(c)];
    }
  }
  int correct = 0;
  for (int t = 0; t < ds.size(); ++t) {
    int best = 0;
    double best_dist = 0.0;
    for (int c = 0; c < ds.num_classes; ++c) {
      double dist = 0.0;
      for (int i = 0; i < ds.dim(); ++i) {
        const double diff = ds.features(i, t) - centroids(i, c);
        dist += diff * diff;
      }
      if (c == 0 || dist < best_dist) {
        best = c;
        best_dist = dist;
      }
    }
    if (best == ds.labels[static_cast<std::size_t>(t)]) ++correct;
  }
  return static_cast<double>(correct) / ds.size();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  REQUIRE(bool(out));
  out << text;
}

}  // namespace

TEST_CASE("gen_blobs shapes, balance, and anchor geometry") {
  const Dataset ds = gen_blobs(4, 25, 16, 8.0, 0.0, 7);
  CHECK(ds.dim() == 16);
  CHECK(ds.size() == 100);
  CHECK(ds.num_classes == 4);

  std::vector<int> counts(4, 0);
  for (int label : ds.labels) ++counts[static_cast<std::size_t>(label)];
  for (int c = 0; c < 4; ++c) CHECK(counts[static_cast<std::size_t>(c)] == 25);

  // within_std = 0 collapses each class onto its anchor, so column 0 of a
  // class is the anchor itself.
  for (int c = 0; c < 4; ++c) {
    for (int s = 1; s < 25; ++s) {
      for (int i = 0; i < 16; ++i) {
        CHECK(ds.features(i, c * 25 + s) == ds.features(i, c * 25));
      }
    }
  }

  // Anchors have length `separation` and pairwise angles of 60 degrees or
  // more: dot <= separation^2 / 2.
  for (int a = 0; a < 4; ++a) {
    double norm = 0.0;
    for (int i = 0; i < 16; ++i) {
      norm += ds.features(i, a * 25) * ds.features(i, a * 25);
    }
    CHECK(std::abs(std::sqrt(norm) - 8.0) <= 1e-9);
    for (int b = a + 1; b < 4; ++b) {
      double dot = 0.0;
      for (int i = 0; i < 16; ++i) {
        dot += ds.features(i, a * 25) * ds.features(i, b * 25);
      }
      CHECK(dot <= 0.5 * 64.0 + 1e-9);
    }
  }
}

TEST_CASE("gen_blobs is deterministic per seed") {
  const Dataset a = gen_blobs(3, 10, 5, 4.0, 1.0, 42);
  const Dataset b = gen_blobs(3, 10, 5, 4.0, 1.0, 42);
  const Dataset c = gen_blobs(3, 10, 5, 4.0, 1.0, 43);
  CHECK(same_values(a.features, b.features));
  CHECK(a.labels == b.labels);
  CHECK_FALSE(same_values(a.features, c.features));
}

TEST_CASE("gen_blobs fails cleanly when the anchors cannot fit") {
  // A circle holds at most six directions pairwise 60 degrees apart.
  CHECK_THROWS_WITH_AS(gen_blobs(8, 2, 2, 1.0, 0.1, 3),
                       doctest::Contains("10000 tries"), std::runtime_error);
}

TEST_CASE("well separated blobs are centroid-classifiable") {
  const Dataset ds = gen_blobs(4, 100, 16, 8.0, 1.0, 11);
  CHECK(centroid_accuracy(ds) >= 0.99);
}

TEST_CASE("load_table parses the two-line hand case") {
  const std::string path = "data_test_hand.csv";
  write_text(path, "1.0,2.0,0\n3.0,4.0,1\n");
  const Dataset ds = load_table(path);
  CHECK(ds.dim() == 2);
  CHECK(ds.size() == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.features(0, 0) == 1.0);
  CHECK(ds.features(1, 0) == 2.0);
  CHECK(ds.features(0, 1) == 3.0);
  CHECK(ds.features(1, 1) == 4.0);
  CHECK(ds.labels == std::vector<int>{0, 1});
  std::remove(path.c_str());
}

TEST_CASE("load_table rejects malformed input") {
  const std::string path = "data_test_bad.csv";
  SUBCASE("empty file") {
    write_text(path, "");
    CHECK_THROWS_AS(load_table(path), IoError);
  }
  SUBCASE("ragged rows") {
    write_text(path, "1.0,2.0,0\n3.0,1\n");
    CHECK_THROWS_WITH_AS(load_table(path), doctest::Contains("ragged"), IoError);
  }
  SUBCASE("non-numeric feature") {
    write_text(path, "1.0,abc,0\n");
    CHECK_THROWS_WITH_AS(load_table(path), doctest::Contains("line 1"), IoError);
  }
  SUBCASE("fractional label") {
    write_text(path, "1.0,2.0,0.5\n");
    CHECK_THROWS_WITH_AS(load_table(path), doctest::Contains("label"), IoError);
  }
  SUBCASE("negative label") {
    write_text(path, "1.0,2.0,-1\n");
    CHECK_THROWS_AS(load_table(path), IoError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_table("data_test_missing.csv"), IoError);
  }
  std::remove(path.c_str());
}

TEST_CASE("save then load round-trips bit-exactly") {
  Rng rng(19);
  Dataset ds;
  ds.features = Matrix(3, 8);
  for (int t = 0; t < 8; ++t) {
    ds.features(0, t) = rng.normal() * 1e-7;
    ds.features(1, t) = 1.0 / 3.0 + rng.normal();
    ds.features(2, t) = rng.normal() * 1e9;
    ds.labels.push_back(t % 3);
  }
  ds.num_classes = 3;

  const std::string path = "data_test_roundtrip.csv";
  save_table(path, ds);
  const Dataset loaded = load_table(path);
  CHECK(same_values(loaded.features, ds.features));
  CHECK(loaded.labels == ds.labels);
  CHECK(loaded.num_classes == 3);
  std::remove(path.c_str());
}

TEST_CASE("identity augmentation returns the input exactly") {
  Rng rng(23);
  const Vector x{1.5, -2.0, 0.25, 7.0};
  AugmentConfig cfg;  // all defaults are the identity
  const auto [x1, x2] = augment_pair(x, cfg, rng);
  for (int i = 0; i < x.size(); ++i) {
    CHECK(x1[i] == x[i]);
    CHECK(x2[i] == x[i]);
  }
}

TEST_CASE("noise-only augmentation has the expected displacement power") {
  AugmentConfig cfg;
  cfg.noise_std = 0.7;
  const int d = 8, draws = 10000;
  const Vector x{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  Rng rng(29);
  double sum = 0.0;
  int distinct = 0;
  for (int k = 0; k < draws; ++k) {
    const auto [x1, x2] = augment_pair(x, cfg, rng);
    for (int i = 0; i < d; ++i) {
      const double diff = x1[i] - x[i];
      sum += diff * diff;
    }
    bool same = true;
    for (int i = 0; i < d; ++i) {
      if (x1[i] != x2[i]) same = false;
    }
    if (!same) ++distinct;
  }
  const double expected = d * cfg.noise_std * cfg.noise_std;
  CHECK(std::abs(sum / draws - expected) <= 0.05 * expected);
  CHECK(distinct == draws);
}

TEST_CASE("rotations preserve the norm before scaling") {
  AugmentConfig cfg;
  cfg.rotate_pairs = 5;
  cfg.max_angle = 1.0;
  Rng rng(31);
  const Vector x{3.0, -1.0, 2.0, 0.5, -4.0};
  const double norm = norm2(x);
  for (int k = 0; k < 50; ++k) {
    const auto [x1, x2] = augment_pair(x, cfg, rng);
    CHECK(std::abs(norm2(x1) - norm) <= 1e-12 * norm);
    CHECK(std::abs(norm2(x2) - norm) <= 1e-12 * norm);
  }
}

TEST_CASE("scaling multiplies every coordinate by one in-range factor") {
  AugmentConfig cfg;
  cfg.scale_low = 0.8;
  cfg.scale_high = 1.2;
  Rng rng(37);
  const Vector x{2.0, -3.0, 5.0};
  for (int k = 0; k < 50; ++k) {
    const auto [x1, x2] = augment_pair(x, cfg, rng);
    const double s = x1[0] / x[0];
    CHECK(s >= 0.8);
    CHECK(s <= 1.2);
    for (int i = 0; i < x.size(); ++i) {
      CHECK(x1[i] == doctest::Approx(s * x[i]).epsilon(1e-14));
    }
    (void)x2;
  }
}

TEST_CASE("masking zeroes coordinates at the configured rate") {
  AugmentConfig cfg;
  cfg.mask_prob = 0.25;
  Rng rng(41);
  const Vector x{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  int zeros = 0;
  const int draws = 5000;
  for (int k = 0; k < draws; ++k) {
    const auto [x1, x2] = augment_pair(x, cfg, rng);
    for (int i = 0; i < x.size(); ++i) {
      CHECK((x1[i] == 0.0 || x1[i] == 1.0));
      if (x1[i] == 0.0) ++zeros;
    }
    (void)x2;
  }
  const double rate = static_cast<double>(zeros) / (draws * x.size());
  CHECK(std::abs(rate - 0.25) <= 0.02);
}

TEST_CASE("asymmetric branch configs apply per branch") {
  AugmentConfig noisy;
  noisy.noise_std = 1.0;
  AugmentConfig clean;
  Rng rng(43);
  const Vector x{1.0, 2.0};
  const auto [x1, x2] = augment_pair(x, noisy, clean, rng);
  CHECK((x1[0] != x[0] || x1[1] != x[1]));
  CHECK(x2[0] == x[0]);
  CHECK(x2[1] == x[1]);
}

TEST_CASE("augment_pair validates its configuration") {
  Rng rng(47);
  const Vector x{1.0};
  AugmentConfig cfg;
  cfg.rotate_pairs = 1;
  cfg.max_angle = 0.5;
  CHECK_THROWS_AS(augment_pair(x, cfg, rng), std::invalid_argument);
  AugmentConfig bad;
  bad.mask_prob = 1.0;
  CHECK_THROWS_AS(augment_pair(Vector{1.0, 2.0}, bad, rng),
                  std::invalid_argument);
  bad = AugmentConfig{};
  bad.scale_low = 1.5;
  bad.scale_high = 0.5;
  CHECK_THROWS_AS(augment_pair(Vector{1.0, 2.0}, bad, rng),
                  std::invalid_argument);
}

TEST_CASE("batches partition a permutation") {
  const Dataset ds = gen_blobs(2, 5, 3, 2.0, 0.5, 53);  // 10 samples

  SUBCASE("single full-size batch is a permutation") {
    const auto parts = batches(ds, 10, 1, false);
    REQUIRE(parts.size() == 1);
    std::vector<int> sorted = parts[0];
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(10);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(sorted == expected);
  }
  SUBCASE("union covers every index when partial batches are kept") {
    const auto parts = batches(ds, 3, 2, false);
    REQUIRE(parts.size() == 4);
    CHECK(parts[3].size() == 1);
    std::set<int> seen;
    for (const auto& part : parts) seen.insert(part.begin(), part.end());
    CHECK(seen.size() == 10);
  }
  SUBCASE("drop_last discards the remainder") {
    const auto parts = batches(ds, 3, 2, true);
    REQUIRE(parts.size() == 3);
    for (const auto& part : parts) CHECK(part.size() == 3);
  }
  SUBCASE("same seed reproduces the partition, a new seed changes it") {
    const auto a = batches(ds, 3, 5, false);
    const auto b = batches(ds, 3, 5, false);
    const auto c = batches(ds, 3, 6, false);
    CHECK(a == b);
    CHECK(a != c);
  }
  SUBCASE("oversized batch size is rejected") {
    CHECK_THROWS_AS(batches(ds, 11, 1, false), std::invalid_argument);
  }
}

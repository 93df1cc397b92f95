#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cimax/net.hpp"
#include "cimax/train.hpp"

namespace cimax {

// Everything a run needs, with working defaults for the desk benchmark.
// Parsed from a flat "key = value" file; any key can also be overridden
// from the command line.
struct RunConfig {
  // dataset generation
  int num_classes = 4;
  int per_class = 500;
  int input_dim = 16;
  double separation = 8.0;
  double within_std = 1.0;
  std::uint64_t data_seed = 7;

  // architecture
  std::vector<int> encoder_dims = {64, 64};
  std::vector<int> projector_dims = {64, 16};

  // optimization, loss, augmentation
  TrainConfig train;

  // linear probe
  int probe_epochs = 100;
  double probe_lr = 0.1;
  double probe_holdout = 0.0;
  std::uint64_t probe_seed = 1;

  // artifacts
  std::string out_dir = ".";
  std::string run_id = "run";

  NetConfig net_config() const;

  // Cross-field invariants (per-key ranges are enforced at assignment).
  void validate() const;
};

// Parse a config file. Unknown keys, unparsable values, and out-of-range
// values raise ConfigError naming the line.
RunConfig parse_config_file(const std::string& path);

// Apply one "key=value" or "key = value" override; `origin` names the
// source in error messages (e.g. "--set" or "file.cfg:3").
void apply_config_entry(RunConfig& config, const std::string& entry,
                        const std::string& origin);

// Canonical render of every key. parse(dump(c)) reproduces c exactly.
std::string dump_config(const RunConfig& config);

}  // namespace cimax

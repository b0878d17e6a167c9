#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/dataset.hpp"
#include "deepr/mlp.hpp"
#include "deepr/optimizers.hpp"

namespace deepr {

enum class DatasetKind { mnist, synthetic };

/// Everything a run needs. Parsed from `key = value` text where every key
/// has a default and unknown keys are errors (see config_keys()).
struct ExperimentConfig {
  NetworkSpec network = NetworkSpec::mnist();
  HyperParams hp;
  /// When set, hp.temperature is derived from the optimizer (see resolve()).
  bool temperature_auto = true;
  SignPolicy sign_policy = SignPolicy::redraw;

  double connectivity = 0.013;
  std::vector<double> multipliers = mnist_default_multipliers();
  /// Explicit per-layer fractions; overrides connectivity * multipliers.
  std::vector<double> fractions;

  DatasetKind dataset = DatasetKind::mnist;
  std::filesystem::path mnist_dir;
  std::size_t train_subset = 0;
  std::size_t test_subset = 0;
  SyntheticSpec synthetic;
  std::size_t synthetic_test_samples = 500;

  std::uint64_t seed_init = 1;
  std::uint64_t seed_noise = 2;
  std::uint64_t seed_rewire = 3;
  std::uint64_t seed_data = 4;
  std::uint64_t seed_label = 5;

  std::filesystem::path metrics = "metrics.csv";
  std::filesystem::path checkpoint;
  std::size_t record_every = 100;
  std::size_t eval_samples = 1000;

  bool transfer = false;
  bool random_permutations = true;
  std::size_t probe_samples = 1000;

  std::vector<double> sweep_connectivity;
  std::vector<double> sweep_alpha;
  std::vector<OptimizerKind> sweep_optimizers;
  std::size_t sweep_threads = 1;
  std::filesystem::path sweep_output = "sweep";

  double prune_quality = 1.0;
  double weight_decay = 1e-4;

  /// Sets one key from its textual value. Throws ConfigError for unknown
  /// keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// Fills derived values: automatic temperature, per-layer fractions,
  /// default checkpoint path.
  void resolve();
  /// Throws ConfigError when the configuration is inconsistent or a
  /// referenced file is missing.
  void validate() const;

  std::vector<double> layer_fractions() const;
  std::filesystem::path checkpoint_path() const;

  /// Resolved configuration, one `key = value` line per key.
  std::string to_text() const;
};

struct ConfigKey {
  std::string name;
  std::string description;
};

/// Every accepted key with a one-line description, in output order.
const std::vector<ConfigKey>& config_keys();

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "key=value".
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

std::filesystem::path default_mnist_dir();

}  // namespace deepr

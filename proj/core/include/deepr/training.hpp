#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <vector>

#include "deepr/config.hpp"
#include "deepr/dataset.hpp"
#include "deepr/metrics.hpp"
#include "deepr/mlp.hpp"

namespace deepr {

struct DataSplit {
  Dataset train;
  Dataset test;
};

/// Loads MNIST or generates the synthetic task, applying the subset limits.
DataSplit load_data(const ExperimentConfig& cfg);

struct RunOptions {
  /// Skip loading when the caller already holds the data.
  const DataSplit* data = nullptr;
  /// Write metrics, sidecars and the checkpoint.
  bool write_files = true;
  std::function<void(const MetricsRecord&)> on_record;
};

struct RunResult {
  std::filesystem::path metrics_path;
  std::filesystem::path checkpoint_path;
  std::filesystem::path correlations_path;

  std::vector<MetricsRecord> records;
  std::size_t iterations = 0;
  std::size_t potential = 0;
  /// K for DEEP R runs, 0 otherwise.
  std::size_t budget = 0;
  /// Post-iteration checks that found |active| != K.
  std::size_t exact_k_violations = 0;
  /// Newly activated connections per iteration (all layers).
  std::vector<std::size_t> new_per_iteration;

  double final_test_accuracy = 0.0;
  double final_connectivity = 0.0;
  double max_connectivity = 0.0;
  /// Full test-set accuracy at the end of every epoch.
  std::vector<double> epoch_test_accuracy;
  /// Connectivity after each pruning phase (prune runs only).
  std::vector<double> prune_connectivity;
  std::vector<CorrelationRecord> correlations;
};

/// Trains the configured optimizer. Appends a metrics row every
/// record_every iterations and at every epoch end. In transfer mode the
/// labels of both splits are permuted at the start of every epoch and
/// weight/activity correlations between consecutive epochs are recorded.
/// Throws NumericalAbort on a non-finite loss; rows written so far remain.
RunResult run_training(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// run_training with transfer mode switched on.
RunResult run_transfer(ExperimentConfig cfg, const RunOptions& opts = {});

/// Accuracy of `params` on the first n samples of `data` (all when n == 0).
double evaluate(const NetworkSpec& spec, const NetParams& params, const Dataset& data,
                std::size_t n = 0);

}  // namespace deepr

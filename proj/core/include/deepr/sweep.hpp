#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "deepr/config.hpp"
#include "deepr/training.hpp"

namespace deepr {

struct SweepPoint {
  OptimizerKind optimizer = OptimizerKind::deep_r;
  double connectivity = 0.0;
  double alpha = 0.0;
};

struct SweepRow {
  SweepPoint point;
  std::filesystem::path metrics;
  double final_test_accuracy = 0.0;
  double final_connectivity = 0.0;
  double max_connectivity = 0.0;
  /// "ok", or the error message of a failed run.
  std::string status = "ok";
};

/// optimizers x connectivity x alpha, in that nesting order. Empty axes fall
/// back to the base configuration's value.
std::vector<SweepPoint> sweep_grid(const ExperimentConfig& base);

/// The base configuration specialised to one grid point; the metrics file
/// is placed under sweep_output.
ExperimentConfig sweep_config(const ExperimentConfig& base, const SweepPoint& point);

/// Runs every grid point on up to sweep_threads workers. All points share
/// the base seeds. A failing run is reported in its row and does not stop
/// the sweep. Rows come back in grid order and are also written to
/// <sweep_output>/summary.csv.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const RunOptions& opts = {});

void write_sweep_summary(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace deepr

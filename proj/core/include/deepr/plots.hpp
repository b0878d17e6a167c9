#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace deepr {

struct PlotOptions {
  /// Boxcar width for the rewiring curves, in iterations.
  std::size_t boxcar_iterations = 100;
};

/// Turns metrics and correlation files into plot-ready CSV tables in
/// `out_dir`:
///   accuracy_vs_connectivity.csv  final accuracy and connectivity per run
///   accuracy_vs_iteration.csv     train/test accuracy against iteration
///   knew_vs_iteration.csv         newly activated connections per iteration
///                                 and layer, absolute and relative to m_l,
///                                 raw and boxcar-smoothed
///   correlation_vs_epoch.csv      weight/activity correlation per layer
/// Correlation files are recognised by their header. A run is named by its
/// file stem. Throws SchemaError when a required column is missing.
/// Returns the paths written.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<std::filesystem::path>& inputs,
                                                  const std::filesystem::path& out_dir,
                                                  const PlotOptions& options = {});

}  // namespace deepr

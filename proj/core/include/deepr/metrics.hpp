#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace deepr {

/// One row of a run's metrics file.
struct MetricsRecord {
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  /// Iterations aggregated into this row.
  std::size_t window = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t test_samples = 0;
  double connectivity = 0.0;
  std::vector<double> layer_connectivity;
  /// Connections newly activated during the window, per layer.
  std::vector<std::size_t> new_per_layer;
  /// Potential connections per layer.
  std::vector<std::size_t> layer_potential;
  double wall_ms = 0.0;
};

std::vector<std::string> metrics_columns(std::size_t layers);

/// Appends rows to `<path>` (flushed per row) and wall-clock times to the
/// `<path>.timing.csv` sidecar, so the metrics file itself is deterministic.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, std::size_t layers);

  void write(const MetricsRecord& r);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::size_t layers_;
  std::ofstream out_;
  std::ofstream timing_;
};

/// Weight and probe-activity correlation between two consecutive epochs.
struct CorrelationRecord {
  std::size_t epoch_from = 0;
  std::size_t epoch_to = 0;
  std::vector<double> weight;
  std::vector<double> activity;
};

std::vector<std::string> correlation_columns(std::size_t layers);
void write_correlations(const std::filesystem::path& path,
                        const std::vector<CorrelationRecord>& records);

/// A delimiter-separated numeric table with a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool has(const std::string& column) const;
  /// Throws SchemaError naming the missing column.
  std::size_t index(const std::string& column) const;
  std::vector<double> column(const std::string& name) const;
};

/// Reads a comma-separated table. Throws FormatError on ragged or
/// non-numeric rows.
Table read_table(const std::filesystem::path& path);

std::string sidecar(const std::filesystem::path& path, const std::string& suffix);

}  // namespace deepr

#include "deepr/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "deepr/error.hpp"

namespace deepr {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_header(std::ofstream& out, const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
}

}  // namespace

std::string sidecar(const std::filesystem::path& path, const std::string& suffix) {
  return path.string() + suffix;
}

std::vector<std::string> metrics_columns(std::size_t layers) {
  std::vector<std::string> cols{"iteration",     "epoch",        "window",       "train_loss",
                                "train_accuracy", "test_accuracy", "test_samples", "connectivity"};
  for (std::size_t l = 0; l < layers; ++l) cols.push_back("conn_l" + std::to_string(l));
  for (std::size_t l = 0; l < layers; ++l) cols.push_back("knew_l" + std::to_string(l));
  for (std::size_t l = 0; l < layers; ++l) cols.push_back("m_l" + std::to_string(l));
  return cols;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, std::size_t layers)
    : path_(path), layers_(layers), out_(open_out(path)), timing_(open_out(sidecar(path, ".timing.csv"))) {
  write_header(out_, metrics_columns(layers));
  out_.flush();
  timing_ << "iteration,wall_ms\n";
}

void MetricsWriter::write(const MetricsRecord& r) {
  require(r.layer_connectivity.size() == layers_ && r.new_per_layer.size() == layers_ &&
              r.layer_potential.size() == layers_,
          "MetricsWriter: per-layer fields do not match the layer count");
  out_ << r.iteration << ',' << r.epoch << ',' << r.window << ',' << num(r.train_loss) << ','
       << num(r.train_accuracy) << ',' << num(r.test_accuracy) << ',' << r.test_samples << ','
       << num(r.connectivity);
  for (const double c : r.layer_connectivity) out_ << ',' << num(c);
  for (const std::size_t k : r.new_per_layer) out_ << ',' << k;
  for (const std::size_t m : r.layer_potential) out_ << ',' << m;
  out_ << '\n';
  out_.flush();
  timing_ << r.iteration << ',' << num(r.wall_ms) << '\n';
  timing_.flush();
}

std::vector<std::string> correlation_columns(std::size_t layers) {
  std::vector<std::string> cols{"epoch_from", "epoch_to"};
  for (std::size_t l = 0; l < layers; ++l) cols.push_back("weight_l" + std::to_string(l));
  for (std::size_t l = 0; l < layers; ++l) cols.push_back("activity_l" + std::to_string(l));
  return cols;
}

void write_correlations(const std::filesystem::path& path,
                        const std::vector<CorrelationRecord>& records) {
  const std::size_t layers = records.empty() ? 0 : records.front().weight.size();
  auto out = open_out(path);
  write_header(out, correlation_columns(layers));
  for (const auto& r : records) {
    require(r.weight.size() == layers && r.activity.size() == layers,
            "write_correlations: ragged records");
    out << r.epoch_from << ',' << r.epoch_to;
    for (const double v : r.weight) out << ',' << num(v);
    for (const double v : r.activity) out << ',' << num(v);
    out << '\n';
  }
}

bool Table::has(const std::string& column) const {
  return std::find(columns.begin(), columns.end(), column) != columns.end();
}

std::size_t Table::index(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw SchemaError("missing column '" + column + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t i = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[i]);
  return out;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                          cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.columns.size()) + " cells, found " +
                        std::to_string(row.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace deepr

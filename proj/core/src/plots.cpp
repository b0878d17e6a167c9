#include "deepr/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "deepr/error.hpp"
#include "deepr/metrics.hpp"
#include "deepr/stats.hpp"

namespace deepr {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open(const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << header << '\n';
  return out;
}

bool is_correlation_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  return header.rfind("epoch_from", 0) == 0;
}

std::size_t layer_count(const Table& t, const std::string& prefix) {
  std::size_t n = 0;
  while (t.has(prefix + std::to_string(n))) ++n;
  return n;
}

}  // namespace

std::vector<std::filesystem::path> emit_plot_data(const std::vector<std::filesystem::path>& inputs,
                                                  const std::filesystem::path& out_dir,
                                                  const PlotOptions& options) {
  require(options.boxcar_iterations > 0, "emit_plot_data: boxcar width must be positive");
  std::filesystem::create_directories(out_dir);
  const std::vector<std::filesystem::path> paths{
      out_dir / "accuracy_vs_connectivity.csv", out_dir / "accuracy_vs_iteration.csv",
      out_dir / "knew_vs_iteration.csv", out_dir / "correlation_vs_epoch.csv"};
  auto acc_conn = open(paths[0], "run,final_connectivity,max_connectivity,final_test_accuracy");
  auto acc_iter = open(paths[1], "run,iteration,epoch,train_accuracy,test_accuracy,test_samples");
  auto knew = open(paths[2], "run,iteration,layer,absolute,relative,absolute_smoothed,relative_smoothed");
  auto corr = open(paths[3], "run,epoch,layer,weight,activity");

  for (const auto& input : inputs) {
    const std::string run = input.stem().string();
    const Table t = read_table(input);

    if (is_correlation_file(input)) {
      const std::size_t layers = layer_count(t, "weight_l");
      const auto epoch = t.column("epoch_to");
      for (std::size_t l = 0; l < layers; ++l) {
        const auto w = t.column("weight_l" + std::to_string(l));
        const auto a = t.column("activity_l" + std::to_string(l));
        for (std::size_t i = 0; i < epoch.size(); ++i)
          corr << run << ',' << num(epoch[i]) << ',' << l << ',' << num(w[i]) << ',' << num(a[i]) << '\n';
      }
      continue;
    }

    const auto iteration = t.column("iteration");
    const auto epoch = t.column("epoch");
    const auto window = t.column("window");
    const auto train_acc = t.column("train_accuracy");
    const auto test_acc = t.column("test_accuracy");
    const auto test_samples = t.column("test_samples");
    const auto conn = t.column("connectivity");
    for (std::size_t i = 0; i < iteration.size(); ++i) {
      acc_iter << run << ',' << num(iteration[i]) << ',' << num(epoch[i]) << ',' << num(train_acc[i]) << ','
               << num(test_acc[i]) << ',' << num(test_samples[i]) << '\n';
    }
    if (!iteration.empty()) {
      acc_conn << run << ',' << num(conn.back()) << ',' << num(*std::max_element(conn.begin(), conn.end()))
               << ',' << num(test_acc.back()) << '\n';
    }

    const std::size_t layers = layer_count(t, "knew_l");
    if (layers == 0) t.index("knew_l0");
    std::vector<double> windows = window;
    std::sort(windows.begin(), windows.end());
    const double typical = windows.empty() ? 1.0 : std::max(1.0, windows[windows.size() / 2]);
    const auto width_rows = static_cast<std::size_t>(
        std::max(1.0, std::round(static_cast<double>(options.boxcar_iterations) / typical)));
    for (std::size_t l = 0; l < layers; ++l) {
      const auto counts = t.column("knew_l" + std::to_string(l));
      const auto potential = t.column("m_l" + std::to_string(l));
      std::vector<double> absolute(counts.size()), relative(counts.size());
      for (std::size_t i = 0; i < counts.size(); ++i) {
        absolute[i] = window[i] > 0 ? counts[i] / window[i] : 0.0;
        relative[i] = potential[i] > 0 ? absolute[i] / potential[i] : 0.0;
      }
      const auto abs_s = stats::boxcar(absolute, width_rows);
      const auto rel_s = stats::boxcar(relative, width_rows);
      for (std::size_t i = 0; i < counts.size(); ++i) {
        knew << run << ',' << num(iteration[i]) << ',' << l << ',' << num(absolute[i]) << ','
             << num(relative[i]) << ',' << num(abs_s[i]) << ',' << num(rel_s[i]) << '\n';
      }
    }
  }
  return paths;
}

}  // namespace deepr

#include "deepr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "deepr/error.hpp"

namespace deepr {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<SweepPoint> sweep_grid(const ExperimentConfig& base) {
  auto optimizers = base.sweep_optimizers;
  if (optimizers.empty()) optimizers.push_back(base.hp.optimizer);
  auto ps = base.sweep_connectivity;
  if (ps.empty()) ps.push_back(base.connectivity);
  auto alphas = base.sweep_alpha;
  if (alphas.empty()) alphas.push_back(base.hp.alpha.empty() ? 0.0 : base.hp.alpha.front());

  std::vector<SweepPoint> out;
  for (const auto opt : optimizers)
    for (const double p : ps)
      for (const double a : alphas) out.push_back({opt, p, a});
  return out;
}

ExperimentConfig sweep_config(const ExperimentConfig& base, const SweepPoint& point) {
  ExperimentConfig cfg = base;
  cfg.hp.optimizer = point.optimizer;
  cfg.connectivity = point.connectivity;
  cfg.hp.alpha = {point.alpha};
  cfg.sweep_connectivity.clear();
  cfg.sweep_alpha.clear();
  cfg.sweep_optimizers.clear();
  const std::string name = std::string(to_string(point.optimizer)) + "_p" + fmt(point.connectivity) +
                           "_a" + fmt(point.alpha) + ".csv";
  cfg.metrics = base.sweep_output / name;
  cfg.checkpoint.clear();
  return cfg;
}

void write_sweep_summary(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "optimizer,p0,alpha,final_test_accuracy,final_connectivity,max_connectivity,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& c : status)
      if (c == ',' || c == '\n') c = ' ';
    out << to_string(r.point.optimizer) << ',' << fmt(r.point.connectivity) << ',' << fmt(r.point.alpha)
        << ',' << fmt(r.final_test_accuracy) << ',' << fmt(r.final_connectivity) << ','
        << fmt(r.max_connectivity) << ',' << status << '\n';
  }
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const RunOptions& opts) {
  const auto grid = sweep_grid(base);
  std::vector<SweepRow> rows(grid.size());
  if (opts.write_files) std::filesystem::create_directories(base.sweep_output);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      SweepRow& row = rows[i];
      row.point = grid[i];
      const auto cfg = sweep_config(base, grid[i]);
      row.metrics = cfg.metrics;
      try {
        RunOptions local = opts;
        local.on_record = nullptr;
        const auto r = run_training(cfg, local);
        row.final_test_accuracy = r.final_test_accuracy;
        row.final_connectivity = r.final_connectivity;
        row.max_connectivity = r.max_connectivity;
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(base.sweep_threads, grid.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (opts.write_files) write_sweep_summary(base.sweep_output / "summary.csv", rows);
  return rows;
}

}  // namespace deepr

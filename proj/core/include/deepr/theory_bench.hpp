#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/rng.hpp"

namespace deepr::bench {

/// One-dimensional target p*(theta) for the Langevin tests. The sampler
/// should converge to p*(theta)^(1/T) / Z.
struct ToyPosterior {
  std::string name;
  std::size_t dimension = 1;
  std::function<double(double)> log_density;
  std::function<double(double)> grad_log_density;
  double temperature = 1.0;
  /// CDF of the tempered target.
  std::function<double(double)> stationary_cdf;
};

/// log p* = -(theta - mean)^2 / (2 variance); the tempered target is
/// N(mean, variance * T).
ToyPosterior gaussian_toy(double mean, double variance, double temperature);

/// log p* = -(theta^2 - 1)^2 + tilt * theta. The stationary CDF is tabulated
/// by quadrature.
ToyPosterior double_well_toy(double tilt, double temperature);

/// Trapezoid integral of exp(log_density / T) over [lo, 0) and [0, hi].
struct WellMasses {
  double negative = 0.0;
  double positive = 0.0;
  double ratio() const { return positive / negative; }
};
WellMasses well_masses(const ToyPosterior& toy, double lo = -4.0, double hi = 4.0,
                       std::size_t points = 200'001);

struct LangevinParams {
  double eta = 1e-3;
  std::size_t samples = 1'000'000;
  /// Steps between kept samples.
  std::size_t thin = 100;
  std::size_t burn_in = 20'000;
  double start = 0.0;
  double bound = 1e3;
  std::uint64_t seed = 1;
};

struct LangevinResult {
  std::vector<double> samples;
  double ks = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  bool diverged = false;
  std::size_t diverged_at = 0;
};

/// Simulates theta += eta * d/dtheta log p*(theta) + sqrt(2 eta T) nu.
/// KS is measured against toy.stationary_cdf.
LangevinResult run_langevin(const ToyPosterior& toy, const LangevinParams& params);

struct RefinementResult {
  std::vector<double> etas;
  std::vector<double> ks;
  bool stabilized = false;
};

/// Halves eta (doubling thin, so the physical time between samples stays
/// fixed) until two consecutive KS statistics agree within `tolerance`
/// relative, or `max_halvings` is reached.
RefinementResult refine_eta(const ToyPosterior& toy, LangevinParams params,
                            std::size_t max_halvings = 3, double tolerance = 0.2);

/// binomial(M - n_active, K - n_active): the number of admissible
/// constraint vectors compatible with n_active connections.
std::uint64_t mu_count(std::size_t m, std::size_t k, std::size_t n_active);

/// True iff every k with c_k == 0 has theta_k < 0.
bool constraint_check(std::span<const double> theta, std::span<const std::uint8_t> c);

enum class ArchitectureLikelihood {
  pure_prior,      ///< no data term
  essential_pair,  ///< E = sum over k in {0, 1} of lambda/2 (max(theta_k, 0) - a)^2
  network,         ///< cross entropy of a 1-2-2 rectifier net on a toy task
};

std::string to_string(ArchitectureLikelihood likelihood);

struct ArchitectureParams {
  ArchitectureLikelihood likelihood = ArchitectureLikelihood::pure_prior;
  std::size_t budget = 3;
  double eta = 1e-3;
  double alpha = 1.0;
  double temperature = 0.1;
  double theta_min = -0.1;
  double essential_target = 1.0;
  double essential_strength = 1.0;
  std::size_t iterations = 2'000'000;
  std::size_t burn_in = 100'000;
  std::size_t snapshot_every = 10;
  std::size_t min_admissible = 1000;
  std::uint64_t seed = 1;
};

struct ArchitectureResult {
  std::size_t potential = 0;
  std::size_t budget = 0;
  /// Bitmasks with exactly K ones, ascending.
  std::vector<std::uint32_t> slice;
  /// Snapshot counts indexed by bitmask (size 2^M).
  std::vector<std::uint64_t> deep_r_counts;
  std::vector<std::uint64_t> soft_counts;
  std::uint64_t deep_r_off_slice = 0;
  std::uint64_t soft_total = 0;
  std::uint64_t soft_admissible = 0;
  /// Distributions over the slice.
  std::vector<double> deep_r_hist;
  std::vector<double> soft_hist;
  double tv = 0.0;
  double deep_r_tv_uniform = 0.0;
  double soft_tv_uniform = 0.0;
  double deep_r_ess = 0.0;
  double soft_ess = 0.0;
  bool inconclusive = false;
};

/// Runs DEEP R and soft-DEEP R on the same 6-connection network and
/// compares their architecture histograms; soft-DEEP R snapshots are kept
/// only when exactly K connections are active.
ArchitectureResult architecture_frequency_test(const ArchitectureParams& params);

/// DEEP R alone, for long reference runs.
std::vector<std::uint64_t> deep_r_architecture_counts(const ArchitectureParams& params);

struct ReplenishResult {
  std::vector<std::uint32_t> completions;  ///< admissible bitmasks, ascending
  std::vector<std::size_t> counts;
  double chi_square = 0.0;
  double threshold = 0.0;
  double max_se_deviation = 0.0;  ///< max |f - 1/mu| / SE over cells
  std::uint64_t mu = 0;
  bool pass = false;
};

/// Replenishes copies of `store` `trials` times and tests that every
/// admissible completion of its active set is equally likely.
ReplenishResult replenish_operator_test(const ConnectionStore& store, std::size_t trials,
                                        RngStream& rng, double level = 0.99);

struct BenchLine {
  std::string suite;
  std::string name;
  std::string statistic;
  double value = 0.0;
  std::string comparison;  ///< "<", ">", "<=", ">=", "=="
  double threshold = 0.0;
  bool pass = false;
  bool informational = false;
};

struct BenchReport {
  std::vector<BenchLine> lines;

  void add(std::string suite, std::string name, std::string statistic, double value,
           std::string comparison, double threshold, bool informational = false);
  /// True when every non-informational line passed.
  bool all_pass() const;
  std::string to_text() const;
};

std::vector<std::string> suite_names();

/// Runs one suite ("langevin", "double_well", "refine", "mu", "constraint",
/// "architecture", "replenish") or "all". `scale` in (0, 1] shortens the
/// sampling runs for smoke testing.
BenchReport run_bench(const std::string& suite, double scale = 1.0);

}  // namespace deepr::bench

#include "deepr/theory_bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "deepr/error.hpp"
#include "deepr/mlp.hpp"
#include "deepr/optimizers.hpp"
#include "deepr/soft_store.hpp"
#include "deepr/stats.hpp"

namespace deepr::bench {

__extension__ typedef unsigned __int128 u128;

ToyPosterior gaussian_toy(double mean, double variance, double temperature) {
  require(variance > 0.0 && temperature > 0.0, "gaussian_toy: variance and T must be positive");
  ToyPosterior toy;
  toy.name = "gaussian";
  toy.temperature = temperature;
  toy.log_density = [=](double t) { return -(t - mean) * (t - mean) / (2.0 * variance); };
  toy.grad_log_density = [=](double t) { return -(t - mean) / variance; };
  const double sd = std::sqrt(variance * temperature);
  toy.stationary_cdf = [=](double t) { return stats::normal_cdf(t, mean, sd); };
  return toy;
}

namespace {

struct Tabulated {
  double lo;
  double step;
  std::vector<double> cdf;

  double operator()(double x) const {
    if (x <= lo) return 0.0;
    const double pos = (x - lo) / step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf.size()) return 1.0;
    const double f = pos - static_cast<double>(i);
    return cdf[i] + f * (cdf[i + 1] - cdf[i]);
  }
};

std::vector<double> tempered_density(const ToyPosterior& toy, double lo, double step,
                                     std::size_t points) {
  std::vector<double> logs(points);
  for (std::size_t i = 0; i < points; ++i)
    logs[i] = toy.log_density(lo + step * static_cast<double>(i)) / toy.temperature;
  const double mx = *std::max_element(logs.begin(), logs.end());
  for (double& v : logs) v = std::exp(v - mx);
  return logs;
}

}  // namespace

ToyPosterior double_well_toy(double tilt, double temperature) {
  require(temperature > 0.0, "double_well_toy: T must be positive");
  ToyPosterior toy;
  toy.name = "double_well";
  toy.temperature = temperature;
  toy.log_density = [=](double t) { return -(t * t - 1.0) * (t * t - 1.0) + tilt * t; };
  toy.grad_log_density = [=](double t) { return -4.0 * t * (t * t - 1.0) + tilt; };

  const double lo = -4.0, hi = 4.0;
  const std::size_t points = 80'001;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const auto dens = tempered_density(toy, lo, step, points);
  auto table = std::make_shared<Tabulated>(Tabulated{lo, step, std::vector<double>(points, 0.0)});
  for (std::size_t i = 1; i < points; ++i)
    table->cdf[i] = table->cdf[i - 1] + 0.5 * step * (dens[i - 1] + dens[i]);
  const double total = table->cdf.back();
  for (double& v : table->cdf) v /= total;
  toy.stationary_cdf = [table](double x) { return (*table)(x); };
  return toy;
}

WellMasses well_masses(const ToyPosterior& toy, double lo, double hi, std::size_t points) {
  require(lo < 0.0 && hi > 0.0 && points >= 3, "well_masses: grid must straddle 0");
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const auto dens = tempered_density(toy, lo, step, points);
  WellMasses m;
  for (std::size_t i = 1; i < points; ++i) {
    const double a = lo + step * static_cast<double>(i - 1);
    const double b = a + step;
    const double area = 0.5 * step * (dens[i - 1] + dens[i]);
    if (b <= 0.0) {
      m.negative += area;
    } else if (a >= 0.0) {
      m.positive += area;
    } else {
      const double f = -a / step;
      m.negative += area * f;
      m.positive += area * (1.0 - f);
    }
  }
  return m;
}

LangevinResult run_langevin(const ToyPosterior& toy, const LangevinParams& params) {
  require(params.eta > 0.0 && params.thin >= 1, "run_langevin: bad parameters");
  RngStream rng(params.seed, StreamTag::noise);
  const double scale = std::sqrt(2.0 * params.eta * toy.temperature);
  LangevinResult r;
  r.samples.reserve(params.samples);

  std::vector<double> nu(4096);
  std::size_t used = nu.size();
  double theta = params.start;
  const std::size_t total = params.burn_in + params.samples * params.thin;
  for (std::size_t step = 1; step <= total; ++step) {
    if (used == nu.size()) {
      rng.gauss(nu);
      used = 0;
    }
    theta += params.eta * toy.grad_log_density(theta) + scale * nu[used++];
    if (!(std::abs(theta) <= params.bound)) {
      r.diverged = true;
      r.diverged_at = step;
      return r;
    }
    if (step > params.burn_in && (step - params.burn_in) % params.thin == 0) r.samples.push_back(theta);
  }
  r.mean = stats::mean(r.samples);
  r.variance = stats::variance(r.samples);
  if (toy.stationary_cdf && !r.samples.empty()) r.ks = stats::ks_statistic(r.samples, toy.stationary_cdf);
  return r;
}

RefinementResult refine_eta(const ToyPosterior& toy, LangevinParams params,
                            std::size_t max_halvings, double tolerance) {
  RefinementResult out;
  for (std::size_t h = 0; h <= max_halvings; ++h) {
    const auto r = run_langevin(toy, params);
    out.etas.push_back(params.eta);
    out.ks.push_back(r.diverged ? 1.0 : r.ks);
    if (out.ks.size() >= 2) {
      const double prev = out.ks[out.ks.size() - 2];
      if (std::abs(out.ks.back() - prev) <= tolerance * prev) {
        out.stabilized = true;
        break;
      }
    }
    params.eta *= 0.5;
    params.thin *= 2;
    params.burn_in *= 2;
  }
  return out;
}

std::uint64_t mu_count(std::size_t m, std::size_t k, std::size_t n_active) {
  require(n_active <= k, "mu_count: more active connections than the budget K");
  require(k <= m, "mu_count: budget K exceeds M");
  const std::uint64_t n = m - n_active;
  const std::uint64_t r = std::min<std::uint64_t>(k - n_active, n - (k - n_active));
  u128 c = 1;
  for (std::uint64_t i = 0; i < r; ++i) {
    c = c * (n - i) / (i + 1);
    require(c <= std::numeric_limits<std::uint64_t>::max(), "mu_count: overflow");
  }
  return static_cast<std::uint64_t>(c);
}

bool constraint_check(std::span<const double> theta, std::span<const std::uint8_t> c) {
  require(theta.size() == c.size(), "constraint_check: length mismatch");
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (c[k] == 0 && !(theta[k] < 0.0)) return false;
  }
  return true;
}

std::string to_string(ArchitectureLikelihood likelihood) {
  switch (likelihood) {
    case ArchitectureLikelihood::pure_prior: return "pure_prior";
    case ArchitectureLikelihood::essential_pair: return "essential_pair";
    case ArchitectureLikelihood::network: return "network";
  }
  return "?";
}

namespace {

const NetworkSpec& tiny_spec() {
  static const NetworkSpec spec{{1, 2, 2}};
  return spec;
}

struct ToyTask {
  Matrix inputs;
  std::vector<int> labels;
};

const ToyTask& tiny_task() {
  static const ToyTask task = [] {
    ToyTask t;
    t.inputs = Matrix(8, 1);
    for (std::size_t i = 0; i < 8; ++i) {
      const double x = -1.0 + 2.0 * static_cast<double>(i) / 7.0;
      t.inputs(i, 0) = x;
      t.labels.push_back(x > 0.0 ? 1 : 0);
    }
    return t;
  }();
  return task;
}

/// dE/dtheta for the listed connections under the prior-only or
/// essential-pair energies. `theta` maps a connection id to its parameter.
template <class ThetaFn>
void data_gradient(const ArchitectureParams& p, std::span<const std::size_t> ids, ThetaFn theta,
                   GradientSet& grads) {
  grads.ids.assign(ids.begin(), ids.end());
  grads.values.assign(ids.size(), 0.0);
  if (p.likelihood != ArchitectureLikelihood::essential_pair) return;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 2) grads.values[i] = p.essential_strength * (theta(ids[i]) - p.essential_target);
  }
}

void zero_bias(GradientSet& grads) {
  grads.bias.clear();
  for (const auto& layer : tiny_spec().shapes()) grads.bias.emplace_back(layer.fan_out, 0.0);
}

/// Sum over the toy task of the cross entropy gradient.
template <class Store>
GradientSet network_gradient(const Store& store) {
  const auto& task = tiny_task();
  const NetParams params = params_from(store);
  const auto trace = forward(tiny_spec(), params, task.inputs);
  GradientSet g = backward(tiny_spec(), store, params, trace, task.labels);
  const double n = static_cast<double>(task.labels.size());
  for (double& v : g.values) v *= n;
  for (auto& layer : g.bias)
    for (double& v : layer) v *= n;
  return g;
}

HyperParams step_params(const ArchitectureParams& p) {
  HyperParams hp;
  hp.optimizer = OptimizerKind::deep_r;
  hp.eta = p.eta;
  hp.alpha = {p.alpha};
  hp.temperature = p.temperature;
  hp.theta_min = p.theta_min;
  return hp;
}

std::uint32_t popcount(std::uint32_t x) { return static_cast<std::uint32_t>(std::popcount(x)); }

struct DeepRRun {
  std::vector<std::uint64_t> counts;
  std::uint64_t off_slice = 0;
  std::vector<double> indicator;
};

DeepRRun run_deep_r_sampler(const ArchitectureParams& p) {
  const auto layers = tiny_spec().shapes();
  const std::size_t m = total_connections(layers);
  require(p.budget <= m, "architecture test: K exceeds M");
  RngSet rng(p.seed, p.seed, p.seed, p.seed, p.seed);
  ConnectionStore store(layers, p.budget);
  for (const std::size_t k : sample_without_replacement(m, p.budget, rng.init))
    store.activate(k, 0.1 * rng.init.uniform01(), rng.init.sign());
  const HyperParams hp = step_params(p);

  DeepRRun run;
  run.counts.assign(std::size_t{1} << m, 0);
  GradientSet grads;
  for (std::size_t it = 0; it < p.iterations; ++it) {
    if (p.likelihood == ArchitectureLikelihood::network) {
      grads = network_gradient(store);
    } else {
      data_gradient(p, store.active(), [&](std::size_t k) { return store.theta(k); }, grads);
      zero_bias(grads);
    }
    deep_r_step(store, grads, hp, rng.noise, rng.rewire, it);
    if (it >= p.burn_in && (it - p.burn_in) % p.snapshot_every == 0) {
      std::uint32_t mask = 0;
      for (const std::size_t k : store.active()) mask |= 1u << k;
      ++run.counts[mask];
      if (popcount(mask) != p.budget) ++run.off_slice;
      run.indicator.push_back((mask & 1u) ? 1.0 : 0.0);
    }
  }
  return run;
}

}  // namespace

std::vector<std::uint64_t> deep_r_architecture_counts(const ArchitectureParams& params) {
  return run_deep_r_sampler(params).counts;
}

ArchitectureResult architecture_frequency_test(const ArchitectureParams& p) {
  const auto layers = tiny_spec().shapes();
  const std::size_t m = total_connections(layers);
  ArchitectureResult r;
  r.potential = m;
  r.budget = p.budget;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask)
    if (popcount(mask) == p.budget) r.slice.push_back(mask);

  auto deep = run_deep_r_sampler(p);
  r.deep_r_counts = std::move(deep.counts);
  r.deep_r_off_slice = deep.off_slice;
  r.deep_r_ess = stats::effective_sample_size(deep.indicator);

  // soft-DEEP R on the same network and hyperparameters, separate streams
  RngSet rng(p.seed + 1, p.seed + 1, p.seed + 1, p.seed + 1, p.seed + 1);
  SoftStore soft(layers, p.theta_min);
  for (std::size_t k = 0; k < m; ++k) soft.set(k, rng.init.uniform(p.theta_min, 0.1), rng.init.sign());
  const HyperParams hp = step_params(p);
  r.soft_counts.assign(std::size_t{1} << m, 0);
  std::vector<double> indicator;
  GradientSet grads;
  std::vector<std::size_t> ids;
  for (std::size_t it = 0; it < p.iterations; ++it) {
    if (p.likelihood == ArchitectureLikelihood::network) {
      grads = network_gradient(soft);
    } else {
      ids = soft.active_ids();
      data_gradient(p, ids, [&](std::size_t k) { return soft.theta(k); }, grads);
      zero_bias(grads);
    }
    soft_deep_r_step(soft, grads, hp, rng.noise, it);
    if (it >= p.burn_in && (it - p.burn_in) % p.snapshot_every == 0) {
      std::uint32_t mask = 0;
      for (std::size_t k = 0; k < m; ++k)
        if (soft.is_active(k)) mask |= 1u << k;
      ++r.soft_counts[mask];
      ++r.soft_total;
      if (popcount(mask) == p.budget) {
        ++r.soft_admissible;
        indicator.push_back((mask & 1u) ? 1.0 : 0.0);
      }
    }
  }
  r.soft_ess = stats::effective_sample_size(indicator);

  std::vector<double> d, s;
  for (const std::uint32_t mask : r.slice) {
    d.push_back(static_cast<double>(r.deep_r_counts[mask]));
    s.push_back(static_cast<double>(r.soft_counts[mask]));
  }
  r.deep_r_hist = stats::normalize(d);
  r.soft_hist = stats::normalize(s);
  const std::vector<double> uniform(r.slice.size(), 1.0 / static_cast<double>(r.slice.size()));
  r.tv = stats::total_variation(r.deep_r_hist, r.soft_hist);
  r.deep_r_tv_uniform = stats::total_variation(r.deep_r_hist, uniform);
  r.soft_tv_uniform = stats::total_variation(r.soft_hist, uniform);
  r.inconclusive = r.soft_admissible < p.min_admissible;
  return r;
}

ReplenishResult replenish_operator_test(const ConnectionStore& store, std::size_t trials,
                                        RngStream& rng, double level) {
  const std::size_t m = store.potential();
  require(m <= 31, "replenish_operator_test: store too large for bitmask histograms");
  require(store.active_count() < store.budget(), "replenish_operator_test: nothing to replenish");
  require(trials > 0, "replenish_operator_test: need at least one trial");
  std::uint32_t base = 0;
  for (const std::size_t k : store.active()) base |= 1u << k;

  ReplenishResult r;
  r.mu = mu_count(m, store.budget(), store.active_count());
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (popcount(mask) == store.budget() && (mask & base) == base) r.completions.push_back(mask);
  }
  r.counts.assign(r.completions.size(), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    ConnectionStore copy = store;
    copy.replenish(rng);
    std::uint32_t mask = 0;
    for (const std::size_t k : copy.active()) mask |= 1u << k;
    const auto it = std::lower_bound(r.completions.begin(), r.completions.end(), mask);
    require(it != r.completions.end() && *it == mask,
            "replenish_operator_test: replenish produced an inadmissible architecture");
    ++r.counts[static_cast<std::size_t>(it - r.completions.begin())];
  }
  const double p = 1.0 / static_cast<double>(r.completions.size());
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  for (const std::size_t c : r.counts) {
    const double f = static_cast<double>(c) / static_cast<double>(trials);
    r.max_se_deviation = std::max(r.max_se_deviation, std::abs(f - p) / se);
  }
  if (r.counts.size() >= 2) {
    const auto chi = stats::chi_square_uniformity(r.counts, level);
    r.chi_square = chi.statistic;
    r.threshold = chi.threshold;
    r.pass = chi.pass && r.max_se_deviation <= 3.0;
  } else {
    r.pass = r.counts.front() == trials;
  }
  return r;
}

void BenchReport::add(std::string suite, std::string name, std::string statistic, double value,
                      std::string comparison, double threshold, bool informational) {
  bool pass = false;
  if (comparison == "<") pass = value < threshold;
  else if (comparison == "<=") pass = value <= threshold;
  else if (comparison == ">") pass = value > threshold;
  else if (comparison == ">=") pass = value >= threshold;
  else if (comparison == "==") pass = value == threshold;
  else throw ContractViolation("BenchReport::add: unknown comparison " + comparison);
  lines.push_back({std::move(suite), std::move(name), std::move(statistic), value,
                   std::move(comparison), threshold, pass, informational});
}

bool BenchReport::all_pass() const {
  return std::all_of(lines.begin(), lines.end(),
                     [](const BenchLine& l) { return l.pass || l.informational; });
}

std::string BenchReport::to_text() const {
  std::ostringstream os;
  char buf[256];
  for (const auto& l : lines) {
    const char* verdict = l.pass ? "PASS" : (l.informational ? "INFO" : "FAIL");
    std::snprintf(buf, sizeof buf, "%-5s %-13s %-34s %-18s %12.6g %-2s %-12.6g\n", verdict,
                  l.suite.c_str(), l.name.c_str(), l.statistic.c_str(), l.value,
                  l.comparison.c_str(), l.threshold);
    os << buf;
  }
  return os.str();
}

std::vector<std::string> suite_names() {
  return {"langevin", "double_well", "refine", "mu", "architecture", "replenish"};
}

namespace {

std::size_t scaled(std::size_t n, double scale) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(n) * scale));
}

void langevin_suite(BenchReport& report, double scale) {
  const auto toy = gaussian_toy(1.0, 1.0, 0.5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LangevinParams p;
    p.seed = seed;
    p.samples = scaled(p.samples, scale);
    const auto r = run_langevin(toy, p);
    const std::string name = "gaussian T=0.5 seed " + std::to_string(seed);
    report.add("langevin", name, "ks", r.diverged ? 1.0 : r.ks, "<", 0.01);
  }
  const auto unit = gaussian_toy(1.0, 1.0, 1.0);
  LangevinParams p;
  p.seed = 11;
  p.thin = 300;
  p.samples = scaled(p.samples, scale);
  const auto r = run_langevin(unit, p);
  report.add("langevin", "gaussian T=1 variance lower", "variance", r.variance, ">", 0.99);
  report.add("langevin", "gaussian T=1 variance upper", "variance", r.variance, "<", 1.01);
}

void double_well_suite(BenchReport& report, double scale) {
  const auto toy = double_well_toy(0.3, 1.0);
  LangevinParams p;
  p.seed = 21;
  p.start = -1.0;
  p.samples = scaled(p.samples, scale);
  const auto r = run_langevin(toy, p);
  const auto masses = well_masses(toy);
  std::size_t positive = 0;
  for (const double s : r.samples) positive += s >= 0.0;
  const double empirical =
      static_cast<double>(positive) / static_cast<double>(r.samples.size() - positive);
  report.add("double_well", "mass ratio relative error", "rel_err",
             std::abs(empirical / masses.ratio() - 1.0), "<", 0.05);
  report.add("double_well", "ks vs quadrature cdf", "ks", r.ks, "<", 0.01, true);
}

void refine_suite(BenchReport& report, double scale) {
  const auto toy = gaussian_toy(1.0, 1.0, 0.5);
  LangevinParams p;
  p.eta = 4e-3;
  p.thin = 25;
  p.samples = scaled(200'000, scale);
  p.seed = 31;
  const auto r = refine_eta(toy, p);
  for (std::size_t i = 0; i < r.etas.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "gaussian eta=%g", r.etas[i]);
    report.add("refine", name, "ks", r.ks[i], "<", 0.02, true);
  }
  report.add("refine", "ks stabilized within 20%", "stabilized", r.stabilized ? 1.0 : 0.0, "==",
             1.0, true);
}

void mu_suite(BenchReport& report) {
  RngStream rng(41, StreamTag::init);
  std::size_t mismatches = 0;
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= 12; ++m) {
    for (std::size_t k = 0; k <= m; ++k) {
      for (std::size_t n_active = 0; n_active <= k; ++n_active) {
        // random theta with exactly n_active non-negative entries
        std::vector<double> theta(m);
        const auto chosen = sample_without_replacement(m, n_active, rng);
        for (std::size_t i = 0; i < m; ++i) theta[i] = -rng.uniform(0.01, 1.0);
        for (const std::size_t i : chosen) theta[i] = rng.uniform(0.0, 1.0);
        std::uint64_t count = 0;
        std::vector<std::uint8_t> c(m);
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
          if (popcount(mask) != k) continue;
          for (std::size_t i = 0; i < m; ++i) c[i] = (mask >> i) & 1u;
          count += constraint_check(theta, c);
        }
        ++cases;
        mismatches += count != mu_count(m, k, n_active);
      }
    }
  }
  report.add("mu", "mu_count vs enumeration, M<=12", "mismatches", static_cast<double>(mismatches),
             "==", 0.0);
  report.add("mu", "cases enumerated", "cases", static_cast<double>(cases), ">", 0.0, true);
}

void architecture_suite(BenchReport& report, double scale) {
  for (const auto likelihood : {ArchitectureLikelihood::pure_prior,
                                ArchitectureLikelihood::essential_pair,
                                ArchitectureLikelihood::network}) {
    ArchitectureParams p;
    p.likelihood = likelihood;
    p.iterations = scaled(p.iterations, scale);
    p.burn_in = scaled(p.burn_in, scale);
    const bool info = likelihood == ArchitectureLikelihood::network;
    const auto r = architecture_frequency_test(p);
    const std::string tag = to_string(likelihood);
    report.add("architecture", tag + " deep_r vs soft", "tv", r.tv, "<", 0.1, info);
    report.add("architecture", tag + " deep_r off-slice mass", "count",
               static_cast<double>(r.deep_r_off_slice), "==", 0.0);
    report.add("architecture", tag + " soft admissible snapshots", "count",
               static_cast<double>(r.soft_admissible), ">=", static_cast<double>(p.min_admissible),
               info);
    report.add("architecture", tag + " deep_r ess", "ess", r.deep_r_ess, ">", 0.0, true);
    report.add("architecture", tag + " soft ess", "ess", r.soft_ess, ">", 0.0, true);
    if (likelihood == ArchitectureLikelihood::pure_prior) {
      report.add("architecture", tag + " deep_r vs uniform", "tv", r.deep_r_tv_uniform, "<", 0.05);
      report.add("architecture", tag + " soft vs uniform", "tv", r.soft_tv_uniform, "<", 0.05);
    }
    if (likelihood == ArchitectureLikelihood::essential_pair) {
      double deep_mass = 0.0, soft_mass = 0.0;
      for (std::size_t i = 0; i < r.slice.size(); ++i) {
        if ((r.slice[i] & 3u) != 3u) continue;
        deep_mass += r.deep_r_hist[i];
        soft_mass += r.soft_hist[i];
      }
      report.add("architecture", tag + " deep_r mass on pair", "mass", deep_mass, ">", 0.5);
      report.add("architecture", tag + " soft mass on pair", "mass", soft_mass, ">", 0.5);
      ArchitectureParams ref = p;
      ref.iterations *= 10;
      ref.seed = 97;
      const auto counts = deep_r_architecture_counts(ref);
      std::vector<double> h;
      for (const std::uint32_t mask : r.slice) h.push_back(static_cast<double>(counts[mask]));
      const auto ref_hist = stats::normalize(h);
      report.add("architecture", tag + " deep_r vs 10x reference", "tv",
                 stats::total_variation(r.deep_r_hist, ref_hist), "<", 0.05, true);
      report.add("architecture", tag + " soft vs 10x reference", "tv",
                 stats::total_variation(r.soft_hist, ref_hist), "<", 0.1, true);
    }
  }
}

void replenish_suite(BenchReport& report, double scale) {
  const std::size_t trials = scaled(100'000, scale);
  {
    const std::vector<std::size_t> sizes{1, 2, 2};
    ConnectionStore store(make_layer_shapes(sizes), 3);
    store.activate(2, 0.5, 1);
    RngStream rng(51, StreamTag::rewire);
    const auto r = replenish_operator_test(store, trials, rng);
    report.add("replenish", "M=6 K=3 n_active=1 completions", "mu", static_cast<double>(r.mu), "==",
               10.0);
    report.add("replenish", "M=6 K=3 n_active=1 uniformity", "chi2 df=9", r.chi_square, "<",
               r.threshold);
    report.add("replenish", "M=6 K=3 n_active=1 per-cell", "max |z|", r.max_se_deviation, "<=",
               3.0);
  }
  {
    const std::vector<std::size_t> sizes{2, 4};
    ConnectionStore store(make_layer_shapes(sizes), 4);
    for (const std::size_t k : {0, 3, 5, 6}) store.activate(k, 0.5, 1);
    store.set_dormant(5);
    RngStream rng(52, StreamTag::rewire);
    const auto r = replenish_operator_test(store, trials, rng);
    report.add("replenish", "M=8 K=4 one free slot uniformity", "chi2 df=4", r.chi_square, "<",
               r.threshold);
  }
}

}  // namespace

BenchReport run_bench(const std::string& suite, double scale) {
  require(scale > 0.0 && scale <= 1.0, "run_bench: scale must lie in (0, 1]");
  BenchReport report;
  const auto names = suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    throw ConfigError("unknown bench suite '" + suite + "'");
  }
  const auto wanted = [&](const char* name) { return suite == "all" || suite == name; };
  if (wanted("langevin")) langevin_suite(report, scale);
  if (wanted("double_well")) double_well_suite(report, scale);
  if (wanted("refine")) refine_suite(report, scale);
  if (wanted("mu")) mu_suite(report);
  if (wanted("architecture")) architecture_suite(report, scale);
  if (wanted("replenish")) replenish_suite(report, scale);
  return report;
}

}  // namespace deepr::bench

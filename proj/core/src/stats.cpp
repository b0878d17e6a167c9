#include "deepr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "deepr/error.hpp"

namespace deepr::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (const double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "pearson: length mismatch");
  if (a.empty()) return 0.0;
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected) {
  require(observed.size() == expected.size(), "chi_square_statistic: length mismatch");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

double chi_square_quantile(double df, double p) {
  require(df > 0.0 && p > 0.0 && p < 1.0, "chi_square_quantile: bad arguments");
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

double chi_square_p_value(double stat, double df) {
  require(df > 0.0, "chi_square_p_value: df must be positive");
  if (stat <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
}

ChiSquareResult chi_square_uniformity(std::span<const std::size_t> counts, double level) {
  require(counts.size() >= 2, "chi_square_uniformity: need at least two cells");
  std::vector<double> observed(counts.begin(), counts.end());
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  require(total > 0.0, "chi_square_uniformity: no observations");
  const std::vector<double> expected(counts.size(), total / static_cast<double>(counts.size()));
  ChiSquareResult r;
  r.statistic = chi_square_statistic(observed, expected);
  r.df = static_cast<double>(counts.size() - 1);
  r.threshold = chi_square_quantile(r.df, level);
  r.p_value = chi_square_p_value(r.statistic, r.df);
  r.pass = r.statistic < r.threshold;
  return r;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_p_value(double d, std::size_t n) {
  require(n > 0, "kolmogorov_p_value: n must be positive");
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::vector<double> normalize(std::span<const double> weights) {
  std::vector<double> out(weights.begin(), weights.end());
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0)
    for (double& v : out) v /= total;
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "total_variation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) return static_cast<double>(n);
  const double m = mean(series);
  const double var = variance(series);
  if (var == 0.0) return static_cast<double>(n);
  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (series[i] - m) * (series[i + lag] - m);
    return s / (static_cast<double>(n) * var);
  };
  // Geyer: sum pairs Gamma_k = rho(2k) + rho(2k+1) while positive
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double gamma = rho(2 * k) + rho(2 * k + 1);
    if (gamma <= 0.0) break;
    tau += 2.0 * gamma;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

std::vector<double> boxcar(std::span<const double> x, std::size_t width) {
  require(width >= 1, "boxcar: width must be >= 1");
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  const std::size_t left = (width - 1) / 2;
  const std::size_t right = width - 1 - left;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n, i + right + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

}  // namespace deepr::stats

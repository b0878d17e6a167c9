#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace deepr::stats {

double mean(std::span<const double> x);
/// Population (1/N) variance.
double variance(std::span<const double> x);
/// Pearson correlation; 0 when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// sum (o - e)^2 / e over cells with e > 0.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);
/// Upper quantile: the x with P(X <= x) = p for X ~ chi^2(df).
double chi_square_quantile(double df, double p);
/// P(X >= stat) for X ~ chi^2(df).
double chi_square_p_value(double stat, double df);

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool pass = false;
};

/// Goodness of fit of `counts` against the uniform distribution over the
/// cells, accepted when the statistic is below the `level` quantile.
ChiSquareResult chi_square_uniformity(std::span<const std::size_t> counts, double level = 0.99);

/// sup |F_n(x) - F(x)| of the samples against `cdf`. `samples` need not be sorted.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic P(D_n >= d) with the Stephens small-sample correction.
double kolmogorov_p_value(double d, std::size_t n);

/// Normalizes non-negative weights to sum to 1 (all zeros stays all zeros).
std::vector<double> normalize(std::span<const double> weights);
/// 0.5 * sum |p - q|; inputs must have the same length.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Effective sample size from Geyer's initial positive sequence estimator.
double effective_sample_size(std::span<const double> series);

/// Centered moving average over `width` samples, window clipped at the ends.
std::vector<double> boxcar(std::span<const double> x, std::size_t width);

}  // namespace deepr::stats

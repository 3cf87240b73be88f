#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace syncrds {

struct ProportionInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for k successes out of n at normal quantile z.
ProportionInterval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> xs, double p);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// 5% two-sample critical value 1.36 sqrt((n_a + n_b) / (n_a n_b)).
double ks_critical_5pct(std::size_t n_a, std::size_t n_b);

/// Energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'| (V-statistic form) for a
/// caller-supplied metric on indices.
double energy_distance(std::size_t n_a, std::size_t n_b,
                       const std::function<double(std::size_t, std::size_t)>& d_ab,
                       const std::function<double(std::size_t, std::size_t)>& d_aa,
                       const std::function<double(std::size_t, std::size_t)>& d_bb);

}  // namespace syncrds

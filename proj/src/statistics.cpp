#include "syncrds/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "syncrds/error.hpp"

namespace syncrds {

ProportionInterval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  if (k > n) throw InvalidArgument("wilson_interval: more successes than trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::clamp(std::min(center - half, p), 0.0, 1.0),
          std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidArgument("variance: need at least two samples");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw InvalidArgument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: level outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return xs[lo] + w * (xs[hi] - xs[lo]);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_5pct(std::size_t n_a, std::size_t n_b) {
  const double a = static_cast<double>(n_a), b = static_cast<double>(n_b);
  return 1.36 * std::sqrt((a + b) / (a * b));
}

double energy_distance(std::size_t n_a, std::size_t n_b,
                       const std::function<double(std::size_t, std::size_t)>& d_ab,
                       const std::function<double(std::size_t, std::size_t)>& d_aa,
                       const std::function<double(std::size_t, std::size_t)>& d_bb) {
  if (n_a == 0 || n_b == 0) throw InvalidArgument("energy_distance: empty sample");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n_a; ++i)
    for (std::size_t j = 0; j < n_b; ++j) ab += d_ab(i, j);
  for (std::size_t i = 0; i < n_a; ++i)
    for (std::size_t j = 0; j < n_a; ++j) aa += d_aa(i, j);
  for (std::size_t i = 0; i < n_b; ++i)
    for (std::size_t j = 0; j < n_b; ++j) bb += d_bb(i, j);
  const double na = static_cast<double>(n_a), nb = static_cast<double>(n_b);
  const double e = 2.0 * ab / (na * nb) - aa / (na * na) - bb / (nb * nb);
  return std::max(e, 0.0);
}

}  // namespace syncrds

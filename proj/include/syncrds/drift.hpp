#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace syncrds {

/// Scalar drift b : R -> R.
class Drift {
 public:
  enum class Kind { linear, double_well, table, function };

  /// b(x) = -lambda x.
  static Drift linear(double lambda);
  /// b(x) = x - x^3.
  static Drift double_well();
  /// Piecewise-linear interpolation of (xs, bs); constant beyond the ends.
  static Drift table(std::vector<double> xs, std::vector<double> bs);
  static Drift function(std::string name, std::function<double(double)> f);

  double operator()(double x) const;

  /// Upper bound on the Lipschitz constant of b over [lo, hi].
  double lipschitz_on(double lo, double hi) const;

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& table_x() const { return xs_; }
  const std::vector<double>& table_b() const { return bs_; }
  std::string describe() const;

 private:
  Drift() = default;

  Kind kind_ = Kind::linear;
  double lambda_ = 0.0;
  std::vector<double> xs_, bs_;
  std::string name_;
  std::function<double(double)> fn_;
};

/// Fit of the one-sided growth condition
///   (b(x) - b(y))(x - y) <= min(C - c |x-y|^2, C |x-y|^2)
/// over random pairs from a box.
struct DriftReport {
  double C_est = 0.0;
  double c_est = 0.0;
  bool fitted = false;          // some C <= cap and c > 0 fit every pair
  std::size_t violations = 0;   // pairs violating the c -> 0+ limit at C = cap
  std::size_t pairs = 0;
  double worst_x = 0.0, worst_y = 0.0;
};

inline constexpr double kDriftFitCap = 10.0;

DriftReport validate_drift(const Drift& b, double lo, double hi, std::size_t samples,
                           double C_cap = kDriftFitCap, unsigned long long seed = 1);

}  // namespace syncrds

#include "syncrds/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "syncrds/error.hpp"
#include "syncrds/rng.hpp"

namespace syncrds {

Drift Drift::linear(double lambda) {
  if (!std::isfinite(lambda)) throw InvalidArgument("Drift: non-finite lambda");
  Drift d;
  d.kind_ = Kind::linear;
  d.lambda_ = lambda;
  return d;
}

Drift Drift::double_well() {
  Drift d;
  d.kind_ = Kind::double_well;
  return d;
}

Drift Drift::table(std::vector<double> xs, std::vector<double> bs) {
  if (xs.empty() || xs.size() != bs.size()) {
    throw InvalidArgument("Drift table: need matching, non-empty x and b columns");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(bs[i])) {
      throw InvalidArgument("Drift table: non-finite entry");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw InvalidArgument("Drift table: x column must be strictly increasing");
    }
  }
  Drift d;
  d.kind_ = Kind::table;
  d.xs_ = std::move(xs);
  d.bs_ = std::move(bs);
  return d;
}

Drift Drift::function(std::string name, std::function<double(double)> f) {
  if (!f) throw InvalidArgument("Drift: empty function");
  Drift d;
  d.kind_ = Kind::function;
  d.name_ = std::move(name);
  d.fn_ = std::move(f);
  return d;
}

double Drift::operator()(double x) const {
  switch (kind_) {
    case Kind::linear: return -lambda_ * x;
    case Kind::double_well: return x - x * x * x;
    case Kind::table: {
      if (x <= xs_.front()) return bs_.front();
      if (x >= xs_.back()) return bs_.back();
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
      const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
      return bs_[i - 1] + w * (bs_[i] - bs_[i - 1]);
    }
    case Kind::function: return fn_(x);
  }
  return 0.0;
}

double Drift::lipschitz_on(double lo, double hi) const {
  switch (kind_) {
    case Kind::linear: return std::abs(lambda_);
    case Kind::double_well: {
      const double m = std::max(lo * lo, hi * hi);
      return std::max(1.0, 3.0 * m - 1.0);
    }
    case Kind::table: {
      double lip = 0.0;
      for (std::size_t i = 1; i < xs_.size(); ++i) {
        lip = std::max(lip, std::abs((bs_[i] - bs_[i - 1]) / (xs_[i] - xs_[i - 1])));
      }
      return lip;
    }
    case Kind::function: {
      // Finite-difference scan; adequate for the smooth drifts this is used with.
      constexpr int n = 4096;
      const double w = (hi - lo) / n;
      double lip = 0.0;
      double prev = fn_(lo);
      for (int k = 1; k <= n; ++k) {
        const double cur = fn_(lo + k * w);
        lip = std::max(lip, std::abs(cur - prev) / w);
        prev = cur;
      }
      return lip;
    }
  }
  return std::numeric_limits<double>::infinity();
}

std::string Drift::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case Kind::linear: s << "linear(lambda=" << lambda_ << ")"; break;
    case Kind::double_well: s << "double_well"; break;
    case Kind::table: s << "table(" << xs_.size() << " points)"; break;
    case Kind::function: s << "function(" << name_ << ")"; break;
  }
  return s.str();
}

DriftReport validate_drift(const Drift& b, double lo, double hi, std::size_t samples,
                           double C_cap, unsigned long long seed) {
  if (samples < 2) throw InvalidArgument("validate_drift: need at least two samples");
  if (!(lo < hi)) throw InvalidArgument("validate_drift: empty box");

  struct Pair {
    double x, y, r, d;
  };
  std::vector<Pair> pairs;
  pairs.reserve(samples);
  Rng rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = rng.uniform(lo, hi);
    const double y = rng.uniform(lo, hi);
    if (x == y) continue;
    const double r = (x - y) * (x - y);
    pairs.push_back({x, y, r, (b(x) - b(y)) * (x - y)});
  }

  DriftReport rep;
  rep.pairs = pairs.size();
  if (pairs.empty()) return rep;

  // D <= C r for all pairs needs C >= C_lin; D <= C - c r with c > 0 needs C > D_max.
  double c_lin = 0.0;
  double d_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    c_lin = std::max(c_lin, p.d / p.r);
    d_max = std::max(d_max, p.d);
  }
  const double C = std::min(C_cap, std::max(c_lin, 2.0 * std::max(d_max, 0.0)));
  rep.C_est = C;
  rep.fitted = C >= c_lin && C > d_max;
  if (rep.fitted) {
    double c = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) c = std::min(c, (C - p.d) / p.r);
    rep.c_est = c;
  }

  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    const double excess = rep.fitted ? p.d - std::min(C - rep.c_est * p.r, C * p.r)
                                     : p.d - std::min(C, C * p.r);
    if (excess > 1e-12 * std::max(1.0, std::abs(p.d))) ++rep.violations;
    if (excess > worst) {
      worst = excess;
      rep.worst_x = p.x;
      rep.worst_y = p.y;
    }
  }
  return rep;
}

}  // namespace syncrds

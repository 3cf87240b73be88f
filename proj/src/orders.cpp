#include "syncrds/orders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "syncrds/error.hpp"

namespace syncrds {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Composite Simpson rule with the smallest even panel count of width <= step.
template <class F>
double simpson(F&& f, double a, double b, double step, std::size_t& nodes) {
  auto panels = static_cast<std::size_t>(std::ceil((b - a) / step));
  if (panels % 2 == 1) ++panels;
  panels = std::max<std::size_t>(panels, 2);
  const double w = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t k = 1; k < panels; ++k) {
    s += (k % 2 == 1 ? 4.0 : 2.0) * f(a + static_cast<double>(k) * w);
  }
  nodes += panels + 1;
  return s * w / 3.0;
}

}  // namespace

const char* to_string(OrderKind kind) {
  switch (kind) {
    case OrderKind::pointwise_leq: return "pointwise_leq";
    case OrderKind::dual_preceq: return "dual_preceq";
  }
  return "unknown";
}

void OrderRelation::validate() const {
  if (!(tol >= 0.0) || !std::isfinite(tol)) {
    throw InvalidArgument("OrderRelation: tolerance must be finite and nonnegative");
  }
}

GridFunction order_representation(const OrderRelation& order, const GridFunction& x) {
  return order.kind == OrderKind::dual_preceq ? laplacian_solve(x) : x;
}

double order_excess(const OrderRelation& order, const GridFunction& x, const GridFunction& y) {
  require_same_grid(x, y, "leq");
  const GridFunction rx = order_representation(order, x);
  const GridFunction ry = order_representation(order, y);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rx.size(); ++j) worst = std::max(worst, rx[j] - ry[j]);
  return worst;
}

bool leq(const OrderRelation& order, const GridFunction& x, const GridFunction& y) {
  return order_excess(order, x, y) <= order.tol;
}

Interval::Interval(GridFunction lower, GridFunction upper, OrderRelation order)
    : lower_(std::move(lower)), upper_(std::move(upper)), order_(order) {
  order_.validate();
  if (!leq(order_, lower_, upper_)) {
    throw InvalidArgument("Interval: lower bound is not below upper bound under " +
                          std::string(to_string(order_.kind)));
  }
}

bool interval_contains(const Interval& iv, const GridFunction& x) {
  return leq(iv.order(), iv.lower(), x) && leq(iv.order(), x, iv.upper());
}

double probe_bump(int n, double x) {
  if (x <= 1.0) return x;
  if (x <= kTwoPi + 1.0) return 1.0 + std::sin(n * (x - 1.0));
  return kTwoPi + 2.0 - x;
}

double probe_tent(double x) {
  const double mid = std::numbers::pi + 1.0;
  return x <= mid ? 2.0 * x : 2.0 * (kTwoPi + 2.0) - 2.0 * x;
}

NormalityProbe normality_probe(int n, double quad_step) {
  if (n < 1) throw InvalidArgument("normality_probe: n must be at least 1");
  if (!(quad_step > 0.0)) throw InvalidArgument("normality_probe: quad_step must be positive");
  if (quad_step > 1e-3) throw InvalidArgument("normality_probe: quad_step must be <= 1e-3");

  NormalityProbe out;
  out.n = n;
  const double nn = n;
  auto ramp = [](double) { return 1.0; };
  auto wave = [nn](double x) {
    const double d = nn * std::cos(nn * (x - 1.0));
    return d * d;
  };
  std::size_t nodes = 0;
  const double sq = simpson(ramp, 0.0, 1.0, quad_step, nodes) +
                    simpson(wave, 1.0, kTwoPi + 1.0, quad_step, nodes) +
                    simpson(ramp, kTwoPi + 1.0, kTwoPi + 2.0, quad_step, nodes);
  out.seminorm = std::sqrt(sq);
  out.ratio = out.seminorm / nn;

  const double end = kTwoPi + 2.0;
  const auto count = static_cast<std::size_t>(std::ceil(end / quad_step));
  constexpr double slack = 1e-12;
  bool ok = true;
  for (std::size_t k = 0; k <= count && ok; ++k) {
    const double x = std::min(end, static_cast<double>(k) * quad_step);
    const double f = probe_bump(n, x);
    ok = f >= -slack && f <= probe_tent(x) + slack;
  }
  out.bracketed = ok;
  out.nodes = nodes;
  return out;
}

bool closedness_check(const OrderRelation& order, const std::vector<GridFunction>& x_seq,
                      const std::vector<GridFunction>& y_seq, const GridFunction& x_lim,
                      const GridFunction& y_lim) {
  if (x_seq.empty() || x_seq.size() != y_seq.size()) {
    throw PreconditionViolation("closedness_check: sequences must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < x_seq.size(); ++k) {
    if (!leq(order, x_seq[k], y_seq[k])) {
      throw PreconditionViolation("closedness_check: pair " + std::to_string(k) +
                                  " is not ordered");
    }
  }
  auto approaches = [](const std::vector<GridFunction>& seq, const GridFunction& lim) {
    const double first = norm(seq.front() - lim, NormKind::L2);
    const double last = norm(seq.back() - lim, NormKind::L2);
    return last == 0.0 || (seq.size() > 1 && last < first);
  };
  if (!approaches(x_seq, x_lim) || !approaches(y_seq, y_lim)) {
    throw PreconditionViolation("closedness_check: sequences do not approach their limits in L2");
  }
  return leq(order, x_lim, y_lim);
}

}  // namespace syncrds

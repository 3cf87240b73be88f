#pragma once

#include <cstddef>
#include <vector>

#include "syncrds/grid.hpp"

namespace syncrds {

enum class OrderKind {
  pointwise_leq,  // x <= y nodally
  dual_preceq,    // (-Delta_h)^{-1} x <= (-Delta_h)^{-1} y nodally
};

const char* to_string(OrderKind kind);

inline constexpr double kDefaultOrderTolerance = 1e-10;

struct OrderRelation {
  OrderKind kind = OrderKind::pointwise_leq;
  double tol = kDefaultOrderTolerance;  // absolute, nodal

  void validate() const;
};

/// The representation in which `order` compares nodally: x itself, or
/// laplacian_solve(x) for the dual order.
GridFunction order_representation(const OrderRelation& order, const GridFunction& x);

bool leq(const OrderRelation& order, const GridFunction& x, const GridFunction& y);

/// max_j (rep(x)_j - rep(y)_j); leq holds iff this is <= tol.
double order_excess(const OrderRelation& order, const GridFunction& x, const GridFunction& y);

/// Order interval [lower, upper]; construction requires lower <= upper.
class Interval {
 public:
  Interval(GridFunction lower, GridFunction upper, OrderRelation order);

  const GridFunction& lower() const { return lower_; }
  const GridFunction& upper() const { return upper_; }
  const OrderRelation& order() const { return order_; }

 private:
  GridFunction lower_;
  GridFunction upper_;
  OrderRelation order_;
};

bool interval_contains(const Interval& iv, const GridFunction& x);

/// H_0^1 seminorm of the bump family 1 + sin(n(x-1)) on (0, 2 pi + 2) with
/// linear ramps at both ends, obtained by quadrature. Its square is 2 + pi n^2
/// while every member stays between 0 and a fixed tent function, so interval
/// diameters are not controlled by the distance of the endpoints.
struct NormalityProbe {
  int n = 1;
  double seminorm = 0.0;
  double ratio = 0.0;       // seminorm / n
  bool bracketed = false;   // 0 <= f_n <= g on every quadrature node
  std::size_t nodes = 0;
};

NormalityProbe normality_probe(int n, double quad_step);

/// Bump-family member and its tent majorant on (0, 2 pi + 2).
double probe_bump(int n, double x);
double probe_tent(double x);

/// Closedness of the order under limits. Throws PreconditionViolation if the
/// sequences are not ordered termwise or do not approach their limits;
/// otherwise returns leq(order, x_lim, y_lim).
bool closedness_check(const OrderRelation& order, const std::vector<GridFunction>& x_seq,
                      const std::vector<GridFunction>& y_seq, const GridFunction& x_lim,
                      const GridFunction& y_lim);

}  // namespace syncrds

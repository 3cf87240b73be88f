#include "syncrds/grid.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "syncrds/error.hpp"

namespace syncrds {

void GridSpec::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("GridSpec: domain length must be positive");
  }
  if (n_interior < 1) throw InvalidArgument("GridSpec: need at least one interior node");
}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values)
    : spec_(spec), u_(std::move(values)) {
  spec_.validate();
  if (u_.size() != spec_.n_interior) {
    throw InvalidArgument("GridFunction: " + std::to_string(u_.size()) +
                          " values for " + std::to_string(spec_.n_interior) + " nodes");
  }
  for (double v : u_) {
    if (!std::isfinite(v)) throw InvalidArgument("GridFunction: non-finite nodal value");
  }
}

GridFunction GridFunction::zeros(const GridSpec& spec) {
  return GridFunction(spec, std::vector<double>(spec.n_interior, 0.0));
}

GridFunction GridFunction::constant(const GridSpec& spec, double c) {
  return GridFunction(spec, std::vector<double>(spec.n_interior, c));
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* where) {
  if (!(a.spec() == b.spec())) {
    throw InvalidArgument(std::string(where) + ": grid mismatch");
  }
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_grid(*this, o, "GridFunction +=");
  for (std::size_t j = 0; j < u_.size(); ++j) u_[j] += o.u_[j];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_grid(*this, o, "GridFunction -=");
  for (std::size_t j = 0; j < u_.size(); ++j) u_[j] -= o.u_[j];
  return *this;
}

GridFunction& GridFunction::operator*=(double a) {
  for (double& v : u_) v *= a;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double a, GridFunction u) { return u *= a; }

GridFunction laplacian_apply(const GridFunction& u) {
  const std::size_t n = u.size();
  const double inv_h2 = 1.0 / (u.spec().h() * u.spec().h());
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j > 0 ? u[j - 1] : 0.0;
    const double right = j + 1 < n ? u[j + 1] : 0.0;
    out[j] = (left - 2.0 * u[j] + right) * inv_h2;
  }
  return GridFunction(u.spec(), std::move(out));
}

GridFunction laplacian_solve(const GridFunction& f) {
  const std::size_t n = f.size();
  const double h2 = f.spec().h() * f.spec().h();
  // -Delta_h = (1/h^2) tridiag(-1, 2, -1); solve tridiag(-1,2,-1) v = h^2 f.
  std::vector<double> sub(n, -1.0), diag(n, 2.0), sup(n, -1.0), rhs(n);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = h2 * f[j];
  solve_tridiagonal(sub, diag, sup, rhs);
  return GridFunction(f.spec(), std::move(rhs));
}

double inner(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u, v, "inner");
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * v[j];
  return u.spec().h() * s;
}

double norm(const GridFunction& u, NormKind which, double p) {
  const double h = u.spec().h();
  switch (which) {
    case NormKind::L2: {
      double s = 0.0;
      for (double v : u.values()) s += v * v;
      return std::sqrt(h * s);
    }
    case NormKind::H10: {
      double s = 0.0;
      double prev = 0.0;
      for (double v : u.values()) {
        s += (v - prev) * (v - prev);
        prev = v;
      }
      s += prev * prev;
      return std::sqrt(s / h);
    }
    case NormKind::Hminus1: {
      const double q = inner(u, laplacian_solve(u));
      return std::sqrt(std::max(q, 0.0));
    }
    case NormKind::Lp: {
      if (!(p >= 1.0) || !std::isfinite(p)) {
        throw InvalidArgument("norm: Lp requires finite p >= 1");
      }
      double s = 0.0;
      for (double v : u.values()) s += std::pow(std::abs(v), p);
      return std::pow(h * s, 1.0 / p);
    }
  }
  throw InvalidArgument("norm: unknown norm kind");
}

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() != n || sup.size() != n || rhs.size() != n) {
    throw InvalidArgument("solve_tridiagonal: size mismatch");
  }
  if (n == 0) return;
  std::vector<double> c(n);
  double denom = diag[0];
  if (denom == 0.0) throw NumericalFailure("solve_tridiagonal: zero pivot");
  c[0] = sup[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c[i - 1];
    if (denom == 0.0) throw NumericalFailure("solve_tridiagonal: zero pivot");
    c[i] = sup[i] / denom;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() != n || sup.size() != n || rhs.size() != n) {
    throw InvalidArgument("solve_cyclic_tridiagonal: size mismatch");
  }
  if (n == 1) {
    rhs[0] /= diag[0] + sub[0] + sup[0];
    return;
  }
  if (n == 2) {
    const double a00 = diag[0], a01 = sup[0] + sub[0];
    const double a10 = sub[1] + sup[1], a11 = diag[1];
    const double det = a00 * a11 - a01 * a10;
    if (det == 0.0) throw NumericalFailure("solve_cyclic_tridiagonal: singular system");
    const double x0 = (a11 * rhs[0] - a01 * rhs[1]) / det;
    const double x1 = (a00 * rhs[1] - a10 * rhs[0]) / det;
    rhs[0] = x0;
    rhs[1] = x1;
    return;
  }
  const double beta = sub[0];       // A(0, n-1)
  const double alpha = sup[n - 1];  // A(n-1, 0)
  const double gamma = -diag[0];
  std::vector<double> bb(diag.begin(), diag.end());
  bb[0] -= gamma;
  bb[n - 1] -= alpha * beta / gamma;

  std::vector<double> lo(sub.begin(), sub.end()), up(sup.begin(), sup.end());
  lo[0] = 0.0;
  up[n - 1] = 0.0;
  std::vector<double> z(n, 0.0);
  z[0] = gamma;
  z[n - 1] = alpha;
  solve_tridiagonal(lo, bb, up, rhs);
  solve_tridiagonal(lo, bb, up, z);
  const double fact = (rhs[0] + beta * rhs[n - 1] / gamma) /
                      (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * z[i];
}

void write_text(const GridFunction& u, std::ostream& out) {
  char buf[40];
  for (double v : u.values()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

GridFunction read_text(std::istream& in, double domain_length) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      throw InvalidArgument("grid text: bad number on line " + std::to_string(lineno));
    }
    if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) {
      throw InvalidArgument("grid text: trailing characters on line " + std::to_string(lineno));
    }
    values.push_back(v);
  }
  if (values.empty()) throw InvalidArgument("grid text: no values");
  GridSpec spec{domain_length, values.size()};
  return GridFunction(spec, std::move(values));
}

}  // namespace syncrds

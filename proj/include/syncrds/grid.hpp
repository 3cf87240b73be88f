#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace syncrds {

/// Uniform grid on (0, L) with N interior nodes xi_j = j h, h = L/(N+1), and
/// homogeneous Dirichlet values at both ends.
struct GridSpec {
  double length = 1.0;
  std::size_t n_interior = 1;

  double h() const { return length / static_cast<double>(n_interior + 1); }
  double node(std::size_t j) const { return static_cast<double>(j) * h(); }  // j = 1..N
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(GridSpec spec, std::vector<double> values);

  static GridFunction zeros(const GridSpec& spec);
  static GridFunction constant(const GridSpec& spec, double c);
  /// u_j = f(xi_j).
  template <class F>
  static GridFunction sample(const GridSpec& spec, F&& f) {
    std::vector<double> u(spec.n_interior);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = f(spec.node(j + 1));
    return GridFunction(spec, std::move(u));
  }

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return u_.size(); }
  const std::vector<double>& values() const { return u_; }
  std::vector<double>& values() { return u_; }
  double operator[](std::size_t j) const { return u_[j]; }
  double& operator[](std::size_t j) { return u_[j]; }

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double a);

 private:
  GridSpec spec_;
  std::vector<double> u_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double a, GridFunction u);

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* where);

/// (Delta_h u)_j = (u_{j-1} - 2 u_j + u_{j+1}) / h^2 with zero boundary values.
GridFunction laplacian_apply(const GridFunction& u);

/// v with -Delta_h v = f (Thomas algorithm).
GridFunction laplacian_solve(const GridFunction& f);

enum class NormKind { L2, H10, Hminus1, Lp };

double norm(const GridFunction& u, NormKind which, double p = 2.0);

/// Discrete L2 inner product h * sum u_j v_j.
double inner(const GridFunction& u, const GridFunction& v);

/// Solves a general tridiagonal system in place of `rhs`. sub[0] and
/// sup[n-1] are ignored. No pivoting: intended for diagonally dominant or
/// M-matrix systems.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs);

/// Tridiagonal system with corner couplings A(0,n-1) = sub[0] and
/// A(n-1,0) = sup[n-1] (periodic boundary), via Sherman-Morrison.
void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> rhs);

/// One value per line with 17 significant digits.
void write_text(const GridFunction& u, std::ostream& out);
GridFunction read_text(std::istream& in, double domain_length);

}  // namespace syncrds

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace syncrds {

enum class NoiseKind { brownian, q_wiener, fbm };

const char* to_string(NoiseKind kind);

/// Sampled values are snapped to a dyadic lattice of spacing 2^-36. Sums and
/// differences of lattice values are then exact in double precision, which
/// makes increments, shifts and telescoping identities hold bit for bit.
inline constexpr double kNoiseQuantum = 1.0 / 68719476736.0;  // 2^-36
inline constexpr double kNoiseMagnitudeLimit = 65536.0;       // 2^16

/// Largest number of stored samples (time points x components) a generator
/// accepts before rejecting the request.
inline constexpr std::size_t kDefaultMaxSamples = std::size_t{1} << 28;

double quantize_noise(double v);

/// A uniformly sampled two-sided driving path. values()[k] is the state at
/// time t_start + k * dt; each state has dim() components. Immutable.
class NoisePath {
 public:
  NoisePath(NoiseKind kind, double hurst, double t_start, double dt,
            std::size_t dim, std::vector<double> values);

  NoiseKind kind() const { return kind_; }
  double hurst() const { return hurst_; }
  double t_start() const { return t_start_; }
  double dt() const { return dt_; }
  std::size_t dim() const { return dim_; }
  std::size_t length() const { return values_.size() / dim_; }
  double t_end() const { return time_at(length() - 1); }
  double time_at(std::size_t k) const { return t_start_ + static_cast<double>(k) * dt_; }

  std::span<const double> at(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  const std::vector<double>& raw() const { return values_; }

  /// Index of time t; throws InvalidArgument if t is off-grid or outside
  /// the window.
  std::size_t index_of(double t) const;
  bool is_aligned(double t) const;
  bool covers(double t0, double t1) const;

  std::vector<double> value(double t) const;

  /// values[k1] - values[k0] componentwise.
  std::vector<double> increment_between(std::size_t k0, std::size_t k1) const;

 private:
  NoiseKind kind_;
  double hurst_;
  double t_start_;
  double dt_;
  std::size_t dim_;
  std::vector<double> values_;
};

struct QSpec {
  std::vector<double> q;  // mode amplitudes q_i, i = 1..n_modes
  double domain_length = 1.0;

  std::size_t n_modes() const { return q.size(); }
  double trace() const;  // sum q_i^2
  bool non_degenerate() const;
  void validate() const;

  /// q_i = 1/i for i = 1..n_modes.
  static QSpec harmonic(std::size_t n_modes, double domain_length = 1.0);
};

NoisePath gen_brownian(std::uint64_t seed, double t0, double t1, double dt,
                       std::size_t dim,
                       std::size_t max_samples = kDefaultMaxSamples);

/// Nodal values W(t, xi_j) = sum_i q_i sqrt(2/L) sin(i pi xi_j / L) beta_i(t)
/// on the interior nodes xi_j = j L / (grid_n + 1).
NoisePath gen_q_wiener(std::uint64_t seed, const QSpec& qspec,
                       std::size_t grid_n, double t0, double t1, double dt,
                       std::size_t max_samples = kDefaultMaxSamples);

struct FbmOptions {
  // Replace negative circulant eigenvalues by zero instead of failing.
  bool allow_eigenvalue_truncation = false;
  std::size_t max_samples = kDefaultMaxSamples;
};

/// Fractional Brownian motion with Var B_1 = 1 by circulant embedding of the
/// increment autocovariance. Pinned to 0 at time 0 when 0 is in the window,
/// otherwise at t0.
NoisePath gen_fbm(std::uint64_t seed, double hurst, double t0, double t1,
                  double dt, const FbmOptions& options = {});

/// t -> path(t + s) - path(s).
NoisePath shift(const NoisePath& path, double s);

/// path(t) - path(s), componentwise.
std::vector<double> increment(const NoisePath& path, double s, double t);

/// Little-endian dump: "SYNCRDS1", dims (u64), dt (f64), t_start (f64),
/// then length x dims float64 values in row-major order.
void write_path_binary(const NoisePath& path, std::ostream& out);
NoisePath read_path_binary(std::istream& in, NoiseKind kind = NoiseKind::brownian,
                           double hurst = 0.5);

}  // namespace syncrds

#include "syncrds/noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "syncrds/error.hpp"
#include "syncrds/log.hpp"
#include "syncrds/rng.hpp"

namespace syncrds {

namespace {

constexpr double kAlignmentTolerance = 1e-6;  // in units of dt
constexpr char kMagic[8] = {'S', 'Y', 'N', 'C', 'R', 'D', 'S', '1'};

std::size_t step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("noise: dt must be positive, got " + std::to_string(dt));
  }
  if (!(t0 < t1)) throw InvalidArgument("noise: require t0 < t1");
  const double ratio = (t1 - t0) / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > kAlignmentTolerance * std::max(1.0, steps)) {
    throw InvalidArgument("noise: dt does not divide t1 - t0");
  }
  if (steps < 1.0) throw InvalidArgument("noise: window shorter than one step");
  return static_cast<std::size_t>(steps);
}

void check_sample_budget(std::size_t steps, std::size_t dim, std::size_t max_samples) {
  if (steps >= max_samples || (steps + 1) > max_samples / dim) {
    throw InvalidArgument("noise: " + std::to_string(steps + 1) + " x " +
                          std::to_string(dim) + " samples exceed the limit of " +
                          std::to_string(max_samples));
  }
}

void quantize_all(std::vector<double>& values) {
  for (double& v : values) {
    if (!(std::abs(v) < kNoiseMagnitudeLimit)) {
      throw NumericalFailure("noise: sample magnitude exceeds exact-arithmetic range");
    }
    v = quantize_noise(v);
  }
}

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(std::istream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), 8);
  if (!in) throw InvalidArgument("noise: truncated binary path");
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

// FFTW's planner is not re-entrant; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n) : n_(n) {
    data_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), data_, data_, FFTW_FORWARD,
                             FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  fftw_complex* data() { return data_; }
  std::size_t size() const { return n_; }
  void forward() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* data_ = nullptr;
  fftw_plan plan_ = nullptr;
};

double fgn_autocovariance(std::size_t k, double hurst) {
  const double kk = static_cast<double>(k);
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(kk + 1.0, two_h) + std::pow(std::abs(kk - 1.0), two_h) -
                2.0 * std::pow(kk, two_h));
}

}  // namespace

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::brownian: return "brownian";
    case NoiseKind::q_wiener: return "q_wiener";
    case NoiseKind::fbm: return "fbm";
  }
  return "unknown";
}

double quantize_noise(double v) {
  return std::nearbyint(v / kNoiseQuantum) * kNoiseQuantum;
}

NoisePath::NoisePath(NoiseKind kind, double hurst, double t_start, double dt,
                     std::size_t dim, std::vector<double> values)
    : kind_(kind), hurst_(hurst), t_start_(t_start), dt_(dt), dim_(dim),
      values_(std::move(values)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidArgument("NoisePath: dt must be positive");
  if (dim_ == 0) throw InvalidArgument("NoisePath: dim must be at least 1");
  if (values_.size() % dim_ != 0) throw InvalidArgument("NoisePath: ragged value array");
  if (values_.size() / dim_ < 2) throw InvalidArgument("NoisePath: need at least two samples");
  if (!(hurst_ > 0.0 && hurst_ < 1.0)) throw InvalidArgument("NoisePath: Hurst index outside (0,1)");
}

bool NoisePath::is_aligned(double t) const {
  const double x = (t - t_start_) / dt_;
  return std::abs(x - std::round(x)) <= kAlignmentTolerance;
}

std::size_t NoisePath::index_of(double t) const {
  const double x = (t - t_start_) / dt_;
  const double k = std::round(x);
  if (std::abs(x - k) > kAlignmentTolerance) {
    std::ostringstream msg;
    msg << "noise: time " << t << " is not on the path grid (t_start " << t_start_
        << ", dt " << dt_ << ")";
    throw InvalidArgument(msg.str());
  }
  if (k < 0.0 || k > static_cast<double>(length() - 1)) {
    std::ostringstream msg;
    msg << "noise: time " << t << " outside window [" << t_start_ << ", " << t_end() << "]";
    throw InvalidArgument(msg.str());
  }
  return static_cast<std::size_t>(k);
}

bool NoisePath::covers(double t0, double t1) const {
  const double eps = kAlignmentTolerance * dt_;
  return t0 >= t_start_ - eps && t1 <= t_end() + eps;
}

std::vector<double> NoisePath::value(double t) const {
  const auto row = at(index_of(t));
  return {row.begin(), row.end()};
}

std::vector<double> NoisePath::increment_between(std::size_t k0, std::size_t k1) const {
  const auto a = at(k0);
  const auto b = at(k1);
  std::vector<double> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = b[i] - a[i];
  return out;
}

double QSpec::trace() const {
  double s = 0.0;
  for (double v : q) s += v * v;
  return s;
}

bool QSpec::non_degenerate() const {
  return !q.empty() && *std::min_element(q.begin(), q.end()) > 0.0;
}

void QSpec::validate() const {
  if (q.empty()) throw InvalidArgument("QSpec: at least one mode required");
  if (!(domain_length > 0.0) || !std::isfinite(domain_length)) {
    throw InvalidArgument("QSpec: domain length must be positive");
  }
  for (double v : q) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("QSpec: mode amplitudes must be finite and nonnegative");
    }
  }
}

QSpec QSpec::harmonic(std::size_t n_modes, double domain_length) {
  QSpec spec;
  spec.domain_length = domain_length;
  spec.q.resize(n_modes);
  for (std::size_t i = 0; i < n_modes; ++i) spec.q[i] = 1.0 / static_cast<double>(i + 1);
  return spec;
}

NoisePath gen_brownian(std::uint64_t seed, double t0, double t1, double dt,
                       std::size_t dim, std::size_t max_samples) {
  if (dim == 0) throw InvalidArgument("gen_brownian: dim must be at least 1");
  const std::size_t steps = step_count(t0, t1, dt);
  check_sample_budget(steps, dim, max_samples);

  Rng rng(seed);
  const double sd = std::sqrt(dt);
  std::vector<double> values((steps + 1) * dim, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    for (std::size_t i = 0; i < dim; ++i) {
      values[k * dim + i] = values[(k - 1) * dim + i] + sd * rng.gaussian();
    }
  }
  quantize_all(values);
  return NoisePath(NoiseKind::brownian, 0.5, t0, dt, dim, std::move(values));
}

NoisePath gen_q_wiener(std::uint64_t seed, const QSpec& qspec, std::size_t grid_n,
                       double t0, double t1, double dt, std::size_t max_samples) {
  qspec.validate();
  if (grid_n == 0) throw InvalidArgument("gen_q_wiener: grid_n must be at least 1");
  if (qspec.n_modes() > grid_n) {
    warn("gen_q_wiener: " + std::to_string(qspec.n_modes()) + " modes on " +
         std::to_string(grid_n) + " interior nodes; high modes alias");
  }
  const std::size_t steps = step_count(t0, t1, dt);
  check_sample_budget(steps, std::max(grid_n, qspec.n_modes()), max_samples);

  const std::size_t modes = qspec.n_modes();
  const double len = qspec.domain_length;
  const double h = len / static_cast<double>(grid_n + 1);
  // basis(j, i) = q_i sqrt(2/L) sin(i pi xi_j / L)
  std::vector<double> basis(grid_n * modes);
  for (std::size_t j = 0; j < grid_n; ++j) {
    const double xi = static_cast<double>(j + 1) * h;
    for (std::size_t i = 0; i < modes; ++i) {
      basis[j * modes + i] = qspec.q[i] * std::sqrt(2.0 / len) *
                             std::sin(static_cast<double>(i + 1) * std::numbers::pi * xi / len);
    }
  }

  Rng rng(seed);
  const double sd = std::sqrt(dt);
  std::vector<double> beta(modes, 0.0);
  std::vector<double> values((steps + 1) * grid_n, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    for (double& b : beta) b += sd * rng.gaussian();
    for (std::size_t j = 0; j < grid_n; ++j) {
      double w = 0.0;
      for (std::size_t i = 0; i < modes; ++i) w += basis[j * modes + i] * beta[i];
      values[k * grid_n + j] = w;
    }
  }
  quantize_all(values);
  return NoisePath(NoiseKind::q_wiener, 0.5, t0, dt, grid_n, std::move(values));
}

NoisePath gen_fbm(std::uint64_t seed, double hurst, double t0, double t1, double dt,
                  const FbmOptions& options) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw InvalidArgument("gen_fbm: Hurst index must lie in (0,1)");
  }
  const std::size_t steps = step_count(t0, t1, dt);
  check_sample_budget(steps, 1, options.max_samples);

  // Circulant of size 2n built from gamma(0..n), gamma(n-1..1).
  const std::size_t n = steps;
  const std::size_t m = 2 * n;
  FftBuffer buf(m);
  auto* c = buf.data();
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = k <= n ? k : m - k;
    c[k][0] = fgn_autocovariance(lag, hurst);
    c[k][1] = 0.0;
  }
  buf.forward();
  std::vector<double> eigen(m);
  double max_eig = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    eigen[k] = c[k][0];
    max_eig = std::max(max_eig, std::abs(eigen[k]));
  }
  const double rounding = 1e-12 * max_eig;
  for (std::size_t k = 0; k < m; ++k) {
    if (eigen[k] >= 0.0) continue;
    if (eigen[k] >= -rounding) {
      eigen[k] = 0.0;
      continue;
    }
    if (!options.allow_eigenvalue_truncation) {
      std::ostringstream msg;
      msg << "gen_fbm: circulant embedding has negative eigenvalue " << eigen[k]
          << " at index " << k << " (H=" << hurst << ", n=" << n
          << "); enable eigenvalue truncation to use the approximate embedding";
      throw NumericalFailure(msg.str());
    }
    eigen[k] = 0.0;
  }

  Rng rng(seed);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double amp = std::sqrt(eigen[k] * scale);
    c[k][0] = amp * rng.gaussian();
    c[k][1] = amp * rng.gaussian();
  }
  buf.forward();

  const double dt_scale = std::pow(dt, hurst);
  std::vector<double> values(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) values[k] = values[k - 1] + dt_scale * c[k - 1][0];

  std::size_t pin = 0;
  if (t0 <= 0.0 && t1 >= 0.0) {
    const double x = -t0 / dt;
    if (std::abs(x - std::round(x)) > kAlignmentTolerance) {
      throw InvalidArgument("gen_fbm: time 0 is not on the sampling grid");
    }
    pin = std::min(n, static_cast<std::size_t>(std::round(x)));
  }
  quantize_all(values);
  const double origin = values[pin];
  for (double& v : values) v -= origin;
  return NoisePath(NoiseKind::fbm, hurst, t0, dt, 1, std::move(values));
}

NoisePath shift(const NoisePath& path, double s) {
  const std::size_t ks = path.index_of(s);
  const std::size_t dim = path.dim();
  const auto origin = path.at(ks);
  std::vector<double> values(path.raw());
  for (std::size_t k = 0; k < path.length(); ++k) {
    for (std::size_t i = 0; i < dim; ++i) values[k * dim + i] -= origin[i];
  }
  return NoisePath(path.kind(), path.hurst(), path.t_start() - s, path.dt(), dim,
                   std::move(values));
}

std::vector<double> increment(const NoisePath& path, double s, double t) {
  if (s > t) throw InvalidArgument("increment: require s <= t");
  return path.increment_between(path.index_of(s), path.index_of(t));
}

void write_path_binary(const NoisePath& path, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put_le<std::uint64_t>(out, path.dim());
  put_le<double>(out, path.dt());
  put_le<double>(out, path.t_start());
  for (double v : path.raw()) put_le<double>(out, v);
  if (!out) throw Error("noise: failed writing binary path");
}

NoisePath read_path_binary(std::istream& in, NoiseKind kind, double hurst) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw InvalidArgument("noise: not a SYNCRDS1 path file");
  }
  const auto dims = get_le<std::uint64_t>(in);
  const auto dt = get_le<double>(in);
  const auto t_start = get_le<double>(in);
  if (dims == 0 || dims > (std::uint64_t{1} << 32)) {
    throw InvalidArgument("noise: bad component count in header");
  }
  std::vector<double> values;
  for (;;) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), 8);
    if (in.gcount() == 0) break;
    if (in.gcount() != 8) throw InvalidArgument("noise: truncated binary path");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    double v;
    std::memcpy(&v, &bits, 8);
    values.push_back(v);
  }
  if (values.size() % dims != 0) throw InvalidArgument("noise: ragged binary path");
  return NoisePath(kind, hurst, t_start, dt, static_cast<std::size_t>(dims),
                   std::move(values));
}

}  // namespace syncrds

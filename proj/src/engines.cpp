#include "syncrds/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "syncrds/error.hpp"
#include "syncrds/log.hpp"

namespace syncrds {

namespace {

constexpr double kWallSlack = 1e-12;

double scalar_of(const State& x, const char* who) {
  if (x.size() != 1) {
    throw DomainError(std::string(who) + ": expected a scalar state, got " +
                      std::to_string(x.size()) + " components");
  }
  if (!std::isfinite(x[0])) throw DomainError(std::string(who) + ": non-finite state");
  return x[0];
}

double increment1(const NoisePath& path, std::size_t k, std::size_t stride) {
  return path.at(k + stride)[0] - path.at(k)[0];
}

void require_finite(const State& x, std::size_t n, const char* who) {
  if (x.size() != n) {
    throw DomainError(std::string(who) + ": expected " + std::to_string(n) +
                      " components, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite state");
  }
}

void require_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("engine: dt must be positive and finite");
  }
}

// Scalar monotone equation g(u) = a u + s u^[m] - r = 0 with a > 0, s >= 0.
double solve_scalar_monotone(double a, double s, double m, double r) {
  double lo = std::min(0.0, r / a);
  double hi = std::max(0.0, r / a);
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = a * u + s * signed_power(u, m) - r;
    if (g == 0.0) return u;
    if (g > 0.0) hi = u; else lo = u;
    const double dg = a + s * m * std::pow(std::abs(u), m - 1.0);
    double next = u - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == u || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      return next;
    }
    u = next;
  }
  return u;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

const char* to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::ou: return "ou";
    case EngineKind::fbm_sde: return "fbm_sde";
    case EngineKind::reflected: return "reflected";
    case EngineKind::torus: return "torus";
    case EngineKind::spme: return "spme";
    case EngineKind::two_wall: return "two_wall";
  }
  return "unknown";
}

EngineKind engine_kind_from_string(const std::string& name) {
  for (auto k : {EngineKind::ou, EngineKind::fbm_sde, EngineKind::reflected,
                 EngineKind::torus, EngineKind::spme, EngineKind::two_wall}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidArgument("unknown engine kind '" + name + "'");
}

Engine::Engine(EngineKind kind, double dt) : kind_(kind), dt_(dt) { require_dt(dt); }

State Engine::evolve(const NoisePath& path, State x, double t0, double t1) const {
  if (t1 < t0) throw InvalidArgument("evolve: require t0 <= t1");
  if (path.kind() != noise_kind() || path.dim() != noise_dim()) {
    std::ostringstream msg;
    msg << "evolve: " << to_string(kind()) << " engine needs " << to_string(noise_kind())
        << " noise of dimension " << noise_dim() << ", got " << to_string(path.kind())
        << " of dimension " << path.dim();
    throw InvalidArgument(msg.str());
  }
  validate_state(x);
  const std::size_t k0 = path.index_of(t0);
  const std::size_t k1 = path.index_of(t1);
  const double ratio = dt_ / path.dt();
  const double stride_d = std::round(ratio);
  if (stride_d < 1.0 || std::abs(ratio - stride_d) > 1e-9 * stride_d) {
    throw InvalidArgument("evolve: engine dt is not a multiple of the noise dt");
  }
  const auto stride = static_cast<std::size_t>(stride_d);
  if ((k1 - k0) % stride != 0) {
    throw InvalidArgument("evolve: interval is not a whole number of engine steps");
  }
  for (std::size_t k = k0; k < k1; k += stride) {
    try {
      x = advance(x, path, k, stride);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(std::string(to_string(kind())) + ": " + e.what(),
                             (k - k0) / stride);
    }
  }
  return x;
}

GridFunction as_grid_function(const Engine& engine, const State& x) {
  return GridFunction(engine.state_grid(), x);
}

double torus_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

// ---------------------------------------------------------------- steps

double step_ou(const OuConfig& cfg, double x, double dW, double dt) {
  return x - cfg.rate * x * dt + cfg.sigma * dW;
}

double step_reflected(const ReflectedConfig& cfg, double x, double dW, double dt) {
  if (!(x >= cfg.lower && x <= cfg.upper)) {
    std::ostringstream msg;
    msg << "step_reflected: state " << x << " outside [" << cfg.lower << ", " << cfg.upper << "]";
    throw DomainError(msg.str());
  }
  return std::clamp(x + cfg.drift(x) * dt + dW, cfg.lower, cfg.upper);
}

double step_torus(double x, double dW, double /*dt*/) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("step_torus: state outside [0,1)");
  double y = x + x * (1.0 - x) * dW;
  y -= std::floor(y);
  return y >= 1.0 ? 0.0 : y;
}

double step_fbm_sde(const FbmConfig& cfg, double x, const NoisePath& path, std::size_t k,
                    std::size_t stride) {
  const std::size_t subs = std::max<std::size_t>(cfg.ode_substeps, 1);
  const double base = path.at(k)[0];
  // B^H(t_k + p dt_noise) - B^H(t_k) for p in [0, stride].
  auto noise_at = [&](double p) {
    std::size_t j = static_cast<std::size_t>(std::floor(p));
    if (j >= stride) j = stride - 1;
    const double frac = p - static_cast<double>(j);
    const double left = path.at(k + j)[0];
    const double right = path.at(k + j + 1)[0];
    return (left - base) + frac * (right - left);
  };
  const double h = static_cast<double>(stride) * path.dt() / static_cast<double>(subs);
  const double dp = static_cast<double>(stride) / static_cast<double>(subs);
  double y = x;
  for (std::size_t s = 0; s < subs; ++s) {
    const double p0 = static_cast<double>(s) * dp;
    const double b0 = noise_at(p0);
    const double bm = noise_at(p0 + 0.5 * dp);
    const double b1 = noise_at(p0 + dp);
    const double k1 = cfg.drift(y + b0);
    const double k2 = cfg.drift(y + 0.5 * h * k1 + bm);
    const double k3 = cfg.drift(y + 0.5 * h * k2 + bm);
    const double k4 = cfg.drift(y + h * k3 + b1);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double out = y + increment1(path, k, stride);
  if (!std::isfinite(out)) throw NumericalFailure("step_fbm_sde: drift evaluation overflow");
  return out;
}

std::vector<double> step_two_wall(const TwoWallConfig& cfg, const std::vector<double>& x,
                                  const std::vector<double>& dW, double dt) {
  const std::size_t n = cfg.n;
  if (x.size() != n || dW.size() != n) throw InvalidArgument("step_two_wall: size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(x[j] >= cfg.h1[j] - kWallSlack && x[j] <= cfg.h2[j] + kWallSlack)) {
      throw DomainError("step_two_wall: state violates the walls at node " + std::to_string(j));
    }
  }
  const double h = cfg.h();
  const double c = dt / (h * h);
  const double noise_scale = cfg.sigma / std::sqrt(h);
  std::vector<double> sub(n, -c), diag(n, 1.0 + 2.0 * c), sup(n, -c), rhs(n);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = x[j] + dt * cfg.drift(x[j]) + noise_scale * dW[j];
  solve_cyclic_tridiagonal(sub, diag, sup, rhs);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = std::clamp(rhs[j], cfg.h1[j], cfg.h2[j]);
  return rhs;
}

std::vector<double> spme_residual(const SpmeConfig& cfg, const std::vector<double>& u,
                                  const std::vector<double>& b, double dt) {
  const std::size_t n = u.size();
  const double h = cfg.grid.h();
  const double c = dt / (h * h);
  std::vector<double> phi(n), r(n);
  for (std::size_t j = 0; j < n; ++j) phi[j] = signed_power(u[j], cfg.m);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j > 0 ? phi[j - 1] : 0.0;
    const double right = j + 1 < n ? phi[j + 1] : 0.0;
    r[j] = (1.0 - dt) * u[j] - c * (left - 2.0 * phi[j] + right) - b[j];
  }
  return r;
}

GridFunction step_spme(const SpmeConfig& cfg, const GridFunction& x, const GridFunction& dW,
                       double dt, SpmeStepStats* stats) {
  require_same_grid(x, dW, "step_spme");
  if (!(x.spec() == cfg.grid)) throw InvalidArgument("step_spme: state grid differs from config");
  if (!(dt > 0.0 && dt < 1.0)) throw InvalidArgument("step_spme: require 0 < dt < 1");

  const std::size_t n = x.size();
  const double h = cfg.grid.h();
  const double c = dt / (h * h);
  std::vector<double> b(n);
  for (std::size_t j = 0; j < n; ++j) b[j] = x[j] + dW[j];

  std::vector<double> u = b;
  std::vector<double> r = spme_residual(cfg, u, b, dt);
  double res = inf_norm(r);
  std::size_t iter = 0;
  bool newton_ok = true;
  std::vector<double> deriv(n), sub(n), diag(n), sup(n), delta(n), trial(n);
  while (res > cfg.newton_tol) {
    if (iter >= cfg.newton_max_iter) {
      newton_ok = false;
      break;
    }
    ++iter;
    for (std::size_t j = 0; j < n; ++j) {
      deriv[j] = cfg.m * std::pow(std::abs(u[j]) + cfg.jac_reg, cfg.m - 1.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
      diag[j] = (1.0 - dt) + 2.0 * c * deriv[j];
      sub[j] = j > 0 ? -c * deriv[j - 1] : 0.0;
      sup[j] = j + 1 < n ? -c * deriv[j + 1] : 0.0;
      delta[j] = -r[j];
    }
    solve_tridiagonal(sub, diag, sup, delta);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = u[j] + lambda * delta[j];
      auto rt = spme_residual(cfg, trial, b, dt);
      const double rn = inf_norm(rt);
      if (std::isfinite(rn) && rn <= (1.0 - 1e-4 * lambda) * res) {
        u.swap(trial);
        r.swap(rt);
        res = rn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      newton_ok = false;
      break;
    }
  }

  bool fallback = false;
  if (!newton_ok) {
    // Nonlinear Gauss-Seidel: each nodal equation is strictly increasing in
    // its own unknown and nonincreasing in the neighbours.
    fallback = true;
    const std::size_t max_sweeps = 200000;
    std::size_t sweep = 0;
    for (; sweep < max_sweeps && !(res <= cfg.newton_tol); ++sweep) {
      for (std::size_t j = 0; j < n; ++j) {
        const double left = j > 0 ? signed_power(u[j - 1], cfg.m) : 0.0;
        const double right = j + 1 < n ? signed_power(u[j + 1], cfg.m) : 0.0;
        u[j] = solve_scalar_monotone(1.0 - dt, 2.0 * c, cfg.m, b[j] + c * (left + right));
      }
      r = spme_residual(cfg, u, b, dt);
      res = inf_norm(r);
    }
    if (!(res <= cfg.newton_tol)) {
      std::ostringstream msg;
      msg << "step_spme: Newton and Gauss-Seidel failed, residual " << res;
      throw NumericalFailure(msg.str());
    }
  }
  if (stats) {
    stats->newton_iterations = iter;
    stats->used_fallback = fallback;
    stats->residual = res;
  }
  return GridFunction(x.spec(), std::move(u));
}

// ---------------------------------------------------------------- engines

OuEngine::OuEngine(OuConfig cfg, double dt) : Engine(EngineKind::ou, dt), cfg_(cfg) {
  if (!std::isfinite(cfg_.rate) || !std::isfinite(cfg_.sigma)) {
    throw InvalidArgument("ou: rate and sigma must be finite");
  }
}

NoisePath OuEngine::make_noise(std::uint64_t seed, double t0, double t1) const {
  return gen_brownian(seed, t0, t1, dt(), 1);
}

void OuEngine::validate_state(const State& x) const { scalar_of(x, "ou"); }

double OuEngine::distance(const State& a, const State& b) const {
  return std::abs(a[0] - b[0]);
}

State OuEngine::sample_state(Rng& rng) const { return {1.5 * rng.gaussian()}; }

State OuEngine::advance(const State& x, const NoisePath& path, std::size_t k,
                        std::size_t stride) const {
  return {step_ou(cfg_, x[0], increment1(path, k, stride), dt())};
}

FbmEngine::FbmEngine(FbmConfig cfg, double dt)
    : Engine(EngineKind::fbm_sde, dt), cfg_(std::move(cfg)) {
  if (!(cfg_.hurst > 0.0 && cfg_.hurst < 1.0)) {
    throw InvalidArgument("fbm_sde: Hurst index must lie in (0,1)");
  }
  if (cfg_.ode_substeps < 1) throw InvalidArgument("fbm_sde: ode_substeps must be >= 1");
}

NoisePath FbmEngine::make_noise(std::uint64_t seed, double t0, double t1) const {
  return gen_fbm(seed, cfg_.hurst, t0, t1, dt());
}

void FbmEngine::validate_state(const State& x) const { scalar_of(x, "fbm_sde"); }

double FbmEngine::distance(const State& a, const State& b) const {
  return std::abs(a[0] - b[0]);
}

State FbmEngine::sample_state(Rng& rng) const { return {rng.uniform(-2.0, 2.0)}; }

State FbmEngine::advance(const State& x, const NoisePath& path, std::size_t k,
                         std::size_t stride) const {
  return {step_fbm_sde(cfg_, x[0], path, k, stride)};
}

ReflectedEngine::ReflectedEngine(ReflectedConfig cfg, double dt)
    : Engine(EngineKind::reflected, dt), cfg_(std::move(cfg)) {
  if (!(cfg_.lower < cfg_.upper)) throw InvalidArgument("reflected: require lower < upper");
}

NoisePath ReflectedEngine::make_noise(std::uint64_t seed, double t0, double t1) const {
  return gen_brownian(seed, t0, t1, dt(), 1);
}

void ReflectedEngine::validate_state(const State& x) const {
  const double v = scalar_of(x, "reflected");
  if (!(v >= cfg_.lower && v <= cfg_.upper)) {
    std::ostringstream msg;
    msg << "reflected: state " << v << " outside [" << cfg_.lower << ", " << cfg_.upper << "]";
    throw DomainError(msg.str());
  }
}

double ReflectedEngine::distance(const State& a, const State& b) const {
  return std::abs(a[0] - b[0]);
}

State ReflectedEngine::default_state() const { return {0.5 * (cfg_.lower + cfg_.upper)}; }

State ReflectedEngine::sample_state(Rng& rng) const {
  return {rng.uniform(cfg_.lower, cfg_.upper)};
}

State ReflectedEngine::project(State x) const {
  for (double& v : x) v = std::clamp(v, cfg_.lower, cfg_.upper);
  return x;
}

State ReflectedEngine::advance(const State& x, const NoisePath& path, std::size_t k,
                               std::size_t stride) const {
  return {step_reflected(cfg_, x[0], increment1(path, k, stride), dt())};
}

TorusEngine::TorusEngine(double dt) : Engine(EngineKind::torus, dt) {}

NoisePath TorusEngine::make_noise(std::uint64_t seed, double t0, double t1) const {
  return gen_brownian(seed, t0, t1, dt(), 1);
}

void TorusEngine::validate_state(const State& x) const {
  const double v = scalar_of(x, "torus");
  if (!(v >= 0.0 && v < 1.0)) throw DomainError("torus: state outside [0,1)");
}

double TorusEngine::distance(const State& a, const State& b) const {
  return torus_distance(a[0], b[0]);
}

State TorusEngine::sample_state(Rng& rng) const {
  const double v = rng.uniform();
  return {v >= 1.0 ? 0.0 : v};
}

State TorusEngine::project(State x) const {
  for (double& v : x) v = std::clamp(v, 0.0, std::nextafter(1.0, 0.0));
  return x;
}

State TorusEngine::advance(const State& x, const NoisePath& path, std::size_t k,
                           std::size_t stride) const {
  return {step_torus(x[0], increment1(path, k, stride), dt())};
}

SpmeEngine::SpmeEngine(SpmeConfig cfg, double dt)
    : Engine(EngineKind::spme, dt), cfg_(std::move(cfg)) {
  cfg_.grid.validate();
  cfg_.qspec.validate();
  if (!(dt < 1.0)) throw InvalidArgument("spme: dt must be < 1");
  if (!(cfg_.m > 1.0)) throw InvalidArgument("spme: m must exceed 1");
  if (!(cfg_.newton_tol > 0.0 && cfg_.newton_tol <= 1e-10)) {
    throw InvalidArgument("spme: newton_tol must lie in (0, 1e-10]");
  }
  if (!(cfg_.jac_reg >= 0.0 && cfg_.jac_reg <= 1e-10)) {
    throw InvalidArgument("spme: jac_reg must lie in [0, 1e-10]");
  }
  if (cfg_.newton_max_iter < 1) throw InvalidArgument("spme: newton_max_iter must be >= 1");
  if (cfg_.qspec.domain_length != cfg_.grid.length) {
    throw InvalidArgument("spme: noise domain length differs from grid length");
  }
  if (!cfg_.qspec.non_degenerate()) {
    warn("spme: some noise mode amplitude is zero; the noise is degenerate");
  }
}

NoisePath SpmeEngine::make_noise(std::uint64_t seed, double t0, double t1) const {
  return gen_q_wiener(seed, cfg_.qspec, cfg_.grid.n_interior, t0, t1, dt());
}

void SpmeEngine::validate_state(const State& x) const {
  require_finite(x, cfg_.grid.n_interior, "spme");
}

double SpmeEngine::distance(const State& a, const State& b) const {
  std::vector<double> d(a.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = a[j] - b[j];
  return norm(GridFunction(cfg_.grid, std::move(d)), NormKind::Hminus1);
}

State SpmeEngine::sample_state(Rng& rng) const {
  std::vector<double> a(4);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.gaussian() / static_cast<double>(i + 1);
  const double len = cfg_.grid.length;
  State x(cfg_.grid.n_interior);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double xi = cfg_.grid.node(j + 1);
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      v += a[i] * std::sin(static_cast<double>(i + 1) * std::numbers::pi * xi / len);
    }
    x[j] = v;
  }
  return x;
}

State SpmeEngine::advance(const State& x, const NoisePath& path, std::size_t k,
                          std::size_t stride) const {
  GridFunction u(cfg_.grid, x);
  GridFunction dW(cfg_.grid, path.increment_between(k, k + stride));
  return step_spme(cfg_, u, dW, dt()).values();
}

TwoWallEngine::TwoWallEngine(TwoWallConfig cfg, double dt)
    : Engine(EngineKind::two_wall, dt), cfg_(std::move(cfg)) {
  if (cfg_.n < 1) throw InvalidArgument("two_wall: need at least one node");
  if (!(cfg_.length > 0.0)) throw InvalidArgument("two_wall: length must be positive");
  if (cfg_.h1.size() != cfg_.n || cfg_.h2.size() != cfg_.n) {
    throw InvalidArgument("two_wall: walls must have one value per node");
  }
  for (std::size_t j = 0; j < cfg_.n; ++j) {
    if (!(cfg_.h1[j] < cfg_.h2[j])) {
      throw InvalidArgument("two_wall: require h1 < h2 at every node (node " +
                            std::to_string(j) + ")");
    }
  }
  if (!std::isfinite(cfg_.sigma)) throw InvalidArgument("two_wall: sigma must be finite");
}

NoisePath TwoWallEngine::make_noise(std::uint64_t seed, double t0, double t1) const {
  return gen_brownian(seed, t0, t1, dt(), cfg_.n);
}

void TwoWallEngine::validate_state(const State& x) const {
  require_finite(x, cfg_.n, "two_wall");
  for (std::size_t j = 0; j < cfg_.n; ++j) {
    if (!(x[j] >= cfg_.h1[j] - kWallSlack && x[j] <= cfg_.h2[j] + kWallSlack)) {
      throw DomainError("two_wall: state violates the walls at node " + std::to_string(j));
    }
  }
}

double TwoWallEngine::distance(const State& a, const State& b) const {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(cfg_.h() * s);
}

State TwoWallEngine::default_state() const {
  State x(cfg_.n);
  for (std::size_t j = 0; j < cfg_.n; ++j) x[j] = 0.5 * (cfg_.h1[j] + cfg_.h2[j]);
  return x;
}

State TwoWallEngine::sample_state(Rng& rng) const {
  State x(cfg_.n);
  for (std::size_t j = 0; j < cfg_.n; ++j) x[j] = rng.uniform(cfg_.h1[j], cfg_.h2[j]);
  return x;
}

State TwoWallEngine::project(State x) const {
  for (std::size_t j = 0; j < cfg_.n; ++j) x[j] = std::clamp(x[j], cfg_.h1[j], cfg_.h2[j]);
  return x;
}

State TwoWallEngine::advance(const State& x, const NoisePath& path, std::size_t k,
                             std::size_t stride) const {
  return step_two_wall(cfg_, x, path.increment_between(k, k + stride), dt());
}

EnginePtr make_engine(const EngineSpec& spec) {
  return std::visit(
      [&](const auto& cfg) -> EnginePtr {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, OuConfig>) {
          return std::make_shared<OuEngine>(cfg, spec.dt);
        } else if constexpr (std::is_same_v<T, FbmConfig>) {
          return std::make_shared<FbmEngine>(cfg, spec.dt);
        } else if constexpr (std::is_same_v<T, ReflectedConfig>) {
          return std::make_shared<ReflectedEngine>(cfg, spec.dt);
        } else if constexpr (std::is_same_v<T, TorusConfig>) {
          return std::make_shared<TorusEngine>(spec.dt);
        } else if constexpr (std::is_same_v<T, SpmeConfig>) {
          return std::make_shared<SpmeEngine>(cfg, spec.dt);
        } else {
          return std::make_shared<TwoWallEngine>(cfg, spec.dt);
        }
      },
      spec.config);
}

}  // namespace syncrds

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "syncrds/drift.hpp"
#include "syncrds/grid.hpp"
#include "syncrds/noise.hpp"
#include "syncrds/rng.hpp"

namespace syncrds {

/// Engine state: one component for the scalar engines, nodal values for the
/// grid engines.
using State = std::vector<double>;

enum class EngineKind { ou, fbm_sde, reflected, torus, spme, two_wall };

const char* to_string(EngineKind kind);
EngineKind engine_kind_from_string(const std::string& name);

/// dX = -rate X dt + sigma dW.
struct OuConfig {
  double rate = 1.0;
  double sigma = 1.0;
};

/// dX = b(X) dt + dB^H, integrated as the random ODE for Y = X - B^H.
struct FbmConfig {
  double hurst = 0.5;
  Drift drift = Drift::linear(1.0);
  std::size_t ode_substeps = 1;
};

/// dX + normal cone of [lower, upper] dt = b(X) dt + dW.
struct ReflectedConfig {
  double lower = -1.0;
  double upper = 1.0;
  Drift drift = Drift::linear(1.0);
};

/// dX = X(1 - X) dW on R/Z.
struct TorusConfig {};

/// dX = (Delta X^[m] + X) dt + dW_Q with zero Dirichlet data.
struct SpmeConfig {
  GridSpec grid{1.0, 32};
  double m = 2.0;
  QSpec qspec = QSpec::harmonic(32);
  double newton_tol = 1e-12;
  std::size_t newton_max_iter = 50;
  double jac_reg = 1e-12;
  // Exponent of the non-degeneracy inequality for the noise; documentation only.
  double sigma_exponent = 2.0;
};

/// dX = d^2X/dx^2 dt + f(X) dt + sigma dW on a periodic grid, kept between
/// walls h1 < h2 by nodal projection.
struct TwoWallConfig {
  std::size_t n = 32;
  double length = 1.0;
  std::vector<double> h1;
  std::vector<double> h2;
  Drift drift = Drift::linear(0.0);
  double sigma = 1.0;

  double h() const { return length / static_cast<double>(n); }
};

using EngineConfig =
    std::variant<OuConfig, FbmConfig, ReflectedConfig, TorusConfig, SpmeConfig, TwoWallConfig>;

struct EngineSpec {
  EngineConfig config;
  double dt = 1e-3;
};

/// A cocycle over the sampled noise: evolve() composes identical scheme steps,
/// each a function of the state and the noise increments on its own interval.
class Engine {
 public:
  virtual ~Engine() = default;

  EngineKind kind() const { return kind_; }
  double dt() const { return dt_; }

  virtual std::size_t state_dim() const = 0;
  virtual NoiseKind noise_kind() const = 0;
  virtual std::size_t noise_dim() const = 0;
  /// Noise path on [t0, t1] sampled at the engine step.
  virtual NoisePath make_noise(std::uint64_t seed, double t0, double t1) const = 0;
  /// True when disjoint time intervals of the driving noise are independent.
  virtual bool white_noise() const { return true; }

  /// Throws DomainError if x is not in the state space.
  virtual void validate_state(const State& x) const = 0;
  virtual double distance(const State& a, const State& b) const = 0;
  /// Grid used to view states as GridFunctions for the order predicates.
  virtual GridSpec state_grid() const = 0;
  virtual State default_state() const = 0;
  virtual State sample_state(Rng& rng) const = 0;
  /// Monotone projection onto the state space.
  virtual State project(State x) const { return x; }

  /// State at t1 started from x at t0 on `path`. t0, t1 must lie on the
  /// engine step grid of the path.
  State evolve(const NoisePath& path, State x, double t0, double t1) const;

 protected:
  Engine(EngineKind kind, double dt);

  /// One scheme step from path index k over `stride` noise samples.
  virtual State advance(const State& x, const NoisePath& path, std::size_t k,
                        std::size_t stride) const = 0;

 private:
  EngineKind kind_;
  double dt_;
};

using EnginePtr = std::shared_ptr<const Engine>;

EnginePtr make_engine(const EngineSpec& spec);

GridFunction as_grid_function(const Engine& engine, const State& x);

// Single scheme steps.

double step_ou(const OuConfig& cfg, double x, double dW, double dt);

struct SpmeStepStats {
  std::size_t newton_iterations = 0;
  bool used_fallback = false;
  double residual = 0.0;
};

/// Fully implicit step u - dt (Delta_h u^[m] + u) = x + dW by damped Newton,
/// falling back to nonlinear Gauss-Seidel sweeps.
GridFunction step_spme(const SpmeConfig& cfg, const GridFunction& x, const GridFunction& dW,
                       double dt, SpmeStepStats* stats = nullptr);

/// Residual (1-dt)u - dt Delta_h u^[m] - b, exact (unregularized).
std::vector<double> spme_residual(const SpmeConfig& cfg, const std::vector<double>& u,
                                  const std::vector<double>& b, double dt);

/// Advances X = Y + B^H from noise index k over `stride` samples by RK4 on
/// Y' = b(Y + B^H(t) - B^H(t_k)), with B^H linearly interpolated.
double step_fbm_sde(const FbmConfig& cfg, double x, const NoisePath& path, std::size_t k,
                    std::size_t stride);

double step_reflected(const ReflectedConfig& cfg, double x, double dW, double dt);

double step_torus(double x, double dW, double dt);

std::vector<double> step_two_wall(const TwoWallConfig& cfg, const std::vector<double>& x,
                                  const std::vector<double>& dW, double dt);

/// u^[m] = |u|^(m-1) u.
inline double signed_power(double u, double m) {
  return u >= 0.0 ? std::pow(u, m) : -std::pow(-u, m);
}

double torus_distance(double a, double b);

// Concrete engines, exposed for direct use and for their configurations.

class OuEngine final : public Engine {
 public:
  OuEngine(OuConfig cfg, double dt);
  const OuConfig& config() const { return cfg_; }
  std::size_t state_dim() const override { return 1; }
  NoiseKind noise_kind() const override { return NoiseKind::brownian; }
  std::size_t noise_dim() const override { return 1; }
  NoisePath make_noise(std::uint64_t seed, double t0, double t1) const override;
  void validate_state(const State& x) const override;
  double distance(const State& a, const State& b) const override;
  GridSpec state_grid() const override { return {1.0, 1}; }
  State default_state() const override { return {0.0}; }
  State sample_state(Rng& rng) const override;

 protected:
  State advance(const State& x, const NoisePath& path, std::size_t k,
                std::size_t stride) const override;

 private:
  OuConfig cfg_;
};

class FbmEngine final : public Engine {
 public:
  FbmEngine(FbmConfig cfg, double dt);
  const FbmConfig& config() const { return cfg_; }
  std::size_t state_dim() const override { return 1; }
  NoiseKind noise_kind() const override { return NoiseKind::fbm; }
  std::size_t noise_dim() const override { return 1; }
  NoisePath make_noise(std::uint64_t seed, double t0, double t1) const override;
  // Fractional noise is treated as non-white for every Hurst index.
  bool white_noise() const override { return false; }
  void validate_state(const State& x) const override;
  double distance(const State& a, const State& b) const override;
  GridSpec state_grid() const override { return {1.0, 1}; }
  State default_state() const override { return {0.0}; }
  State sample_state(Rng& rng) const override;

 protected:
  State advance(const State& x, const NoisePath& path, std::size_t k,
                std::size_t stride) const override;

 private:
  FbmConfig cfg_;
};

class ReflectedEngine final : public Engine {
 public:
  ReflectedEngine(ReflectedConfig cfg, double dt);
  const ReflectedConfig& config() const { return cfg_; }
  std::size_t state_dim() const override { return 1; }
  NoiseKind noise_kind() const override { return NoiseKind::brownian; }
  std::size_t noise_dim() const override { return 1; }
  NoisePath make_noise(std::uint64_t seed, double t0, double t1) const override;
  void validate_state(const State& x) const override;
  double distance(const State& a, const State& b) const override;
  GridSpec state_grid() const override { return {1.0, 1}; }
  State default_state() const override;
  State sample_state(Rng& rng) const override;
  State project(State x) const override;

 protected:
  State advance(const State& x, const NoisePath& path, std::size_t k,
                std::size_t stride) const override;

 private:
  ReflectedConfig cfg_;
};

class TorusEngine final : public Engine {
 public:
  explicit TorusEngine(double dt);
  std::size_t state_dim() const override { return 1; }
  NoiseKind noise_kind() const override { return NoiseKind::brownian; }
  std::size_t noise_dim() const override { return 1; }
  NoisePath make_noise(std::uint64_t seed, double t0, double t1) const override;
  void validate_state(const State& x) const override;
  double distance(const State& a, const State& b) const override;
  GridSpec state_grid() const override { return {1.0, 1}; }
  State default_state() const override { return {0.5}; }
  State sample_state(Rng& rng) const override;
  State project(State x) const override;

 protected:
  State advance(const State& x, const NoisePath& path, std::size_t k,
                std::size_t stride) const override;
};

class SpmeEngine final : public Engine {
 public:
  SpmeEngine(SpmeConfig cfg, double dt);
  const SpmeConfig& config() const { return cfg_; }
  std::size_t state_dim() const override { return cfg_.grid.n_interior; }
  NoiseKind noise_kind() const override { return NoiseKind::q_wiener; }
  std::size_t noise_dim() const override { return cfg_.grid.n_interior; }
  NoisePath make_noise(std::uint64_t seed, double t0, double t1) const override;
  void validate_state(const State& x) const override;
  /// H^{-1} distance.
  double distance(const State& a, const State& b) const override;
  GridSpec state_grid() const override { return cfg_.grid; }
  State default_state() const override { return State(cfg_.grid.n_interior, 0.0); }
  State sample_state(Rng& rng) const override;

 protected:
  State advance(const State& x, const NoisePath& path, std::size_t k,
                std::size_t stride) const override;

 private:
  SpmeConfig cfg_;
};

class TwoWallEngine final : public Engine {
 public:
  TwoWallEngine(TwoWallConfig cfg, double dt);
  const TwoWallConfig& config() const { return cfg_; }
  std::size_t state_dim() const override { return cfg_.n; }
  NoiseKind noise_kind() const override { return NoiseKind::brownian; }
  std::size_t noise_dim() const override { return cfg_.n; }
  NoisePath make_noise(std::uint64_t seed, double t0, double t1) const override;
  void validate_state(const State& x) const override;
  /// Grid L2 distance on the circle.
  double distance(const State& a, const State& b) const override;
  GridSpec state_grid() const override { return {cfg_.length, cfg_.n}; }
  State default_state() const override;
  State sample_state(Rng& rng) const override;
  State project(State x) const override;

 protected:
  State advance(const State& x, const NoisePath& path, std::size_t k,
                std::size_t stride) const override;

 private:
  TwoWallConfig cfg_;
};

}  // namespace syncrds

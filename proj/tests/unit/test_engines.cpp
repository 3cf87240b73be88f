#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "syncrds/engines.hpp"
#include "syncrds/error.hpp"
#include "syncrds/orders.hpp"
#include "syncrds/rng.hpp"

using namespace syncrds;

namespace {

TwoWallConfig two_wall_config(std::size_t n = 16) {
  TwoWallConfig cfg;
  cfg.n = n;
  cfg.h1.assign(n, -1.0);
  cfg.h2.assign(n, 1.0);
  cfg.drift = Drift::linear(1.0);
  cfg.sigma = 0.3;
  return cfg;
}

SpmeConfig spme_config(std::size_t n = 16) {
  SpmeConfig cfg;
  cfg.grid = {1.0, n};
  cfg.qspec = QSpec::harmonic(n);
  return cfg;
}

std::vector<EnginePtr> all_engines() {
  FbmConfig fbm;
  fbm.hurst = 0.7;
  fbm.drift = Drift::double_well();
  return {
      make_engine({OuConfig{}, 0.01}),
      make_engine({fbm, 0.01}),
      make_engine({ReflectedConfig{-1.0, 1.0, Drift::double_well()}, 0.01}),
      make_engine({TorusConfig{}, 0.01}),
      make_engine({spme_config(), 0.01}),
      make_engine({two_wall_config(), 0.01}),
  };
}

}  // namespace

TEST_CASE("engine kind names round-trip") {
  for (auto k : {EngineKind::ou, EngineKind::fbm_sde, EngineKind::reflected, EngineKind::torus,
                 EngineKind::spme, EngineKind::two_wall}) {
    CHECK(engine_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(engine_kind_from_string("heat"), InvalidArgument);
}

TEST_CASE("evolve over an empty interval is the identity") {
  Rng rng(1);
  for (const auto& e : all_engines()) {
    const auto p = e->make_noise(3, 0.0, 1.0);
    const auto x = e->sample_state(rng);
    CHECK(e->evolve(p, x, 0.5, 0.5) == x);
  }
}

TEST_CASE("cocycle and shift identities are exact for every engine") {
  Rng rng(2);
  for (const auto& e : all_engines()) {
    CAPTURE(to_string(e->kind()));
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = e->make_noise(100 + trial, -1.0, 2.0);
      const auto x = e->sample_state(rng);
      const double t1 = -1.0 + 0.01 * static_cast<double>(1 + rng.engine()() % 298);
      const auto whole = e->evolve(p, x, -1.0, 2.0);
      const auto split = e->evolve(p, e->evolve(p, x, -1.0, t1), t1, 2.0);
      CHECK(whole == split);

      const double s = 0.01 * static_cast<double>(rng.engine()() % 100);
      const auto q = shift(p, s);
      CHECK(e->evolve(q, x, 0.0, 1.0) == e->evolve(p, x, s, s + 1.0));
    }
  }
}

TEST_CASE("evolve rejects mismatched noise and misaligned times") {
  const auto ou = make_engine({OuConfig{}, 0.01});
  const auto torus = make_engine({TorusConfig{}, 0.01});
  const auto p = ou->make_noise(1, 0.0, 1.0);
  CHECK_THROWS_AS(ou->evolve(p, {0.0}, 0.5, 0.2), InvalidArgument);
  CHECK_THROWS_AS(ou->evolve(p, {0.0}, 0.0, 0.005), InvalidArgument);
  CHECK_THROWS_AS(ou->evolve(gen_brownian(1, 0.0, 1.0, 0.01, 2), {0.0}, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(torus->evolve(p, {1.5}, 0.0, 1.0), DomainError);
  const auto coarse = make_engine({OuConfig{}, 0.02});
  CHECK_NOTHROW(coarse->evolve(p, {0.0}, 0.0, 1.0));
  CHECK_THROWS_AS(coarse->evolve(p, {0.0}, 0.0, 0.01), InvalidArgument);
}

TEST_CASE("ou engine tracks the exact solution") {
  const double dt = 1e-3;
  const auto e = make_engine({OuConfig{}, dt});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = e->make_noise(seed, 0.0, 1.0);
    const double x = 0.7;
    double oracle = std::exp(-1.0) * x;
    for (std::size_t k = 0; k + 1 < p.length(); ++k) {
      const double dW = p.at(k + 1)[0] - p.at(k)[0];
      oracle += std::exp(-(1.0 - p.time_at(k))) * dW;
    }
    const double got = e->evolve(p, {x}, 0.0, 1.0)[0];
    CHECK(std::abs(got - oracle) <= 0.05 * std::sqrt(dt));
  }
}

TEST_CASE("step_spme") {
  SUBCASE("zero is an equilibrium") {
    const auto cfg = spme_config(8);
    const auto z = GridFunction::zeros(cfg.grid);
    CHECK(step_spme(cfg, z, z, 0.5).values() == z.values());
  }
  SUBCASE("scalar case solves 0.5u + 4u|u| = 4.5") {
    SpmeConfig cfg;
    cfg.grid = {1.0, 1};
    cfg.qspec = QSpec::harmonic(1);
    SpmeStepStats stats;
    const auto u = step_spme(cfg, GridFunction(cfg.grid, {4.5}), GridFunction::zeros(cfg.grid), 0.5, &stats);
    CHECK(std::abs(u[0] - 1.0) <= 1e-10);
    CHECK(stats.residual <= cfg.newton_tol);
    const auto v = step_spme(cfg, GridFunction(cfg.grid, {-4.5}), GridFunction::zeros(cfg.grid), 0.5);
    CHECK(std::abs(v[0] + 1.0) <= 1e-10);
  }
  SUBCASE("converged residual and pointwise comparison") {
    const auto cfg = spme_config(32);
    Rng rng(9);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> x(32), y(32), dw(32);
      for (std::size_t j = 0; j < 32; ++j) {
        x[j] = rng.uniform(-2.0, 2.0);
        y[j] = x[j] + rng.uniform(0.0, 1.0);
        dw[j] = 0.1 * rng.gaussian();
      }
      SpmeStepStats sx, sy;
      const GridFunction noise(cfg.grid, dw);
      const auto ux = step_spme(cfg, GridFunction(cfg.grid, x), noise, 0.01, &sx);
      const auto uy = step_spme(cfg, GridFunction(cfg.grid, y), noise, 0.01, &sy);
      CHECK(sx.residual <= cfg.newton_tol);
      CHECK(sy.residual <= cfg.newton_tol);
      const auto r = spme_residual(cfg, ux.values(), (GridFunction(cfg.grid, x) + noise).values(), 0.01);
      for (double v : r) CHECK(std::abs(v) <= cfg.newton_tol);
      if (!leq(OrderRelation{}, ux, uy)) ++violations;
    }
    CHECK(violations == 0);
  }
  SUBCASE("configuration checks") {
    auto cfg = spme_config(8);
    CHECK_THROWS_AS(SpmeEngine(cfg, 1.0), InvalidArgument);
    cfg.m = 1.0;
    CHECK_THROWS_AS(SpmeEngine(cfg, 0.1), InvalidArgument);
    cfg = spme_config(8);
    cfg.newton_tol = 1e-6;
    CHECK_THROWS_AS(SpmeEngine(cfg, 0.1), InvalidArgument);
  }
}

TEST_CASE("fbm_sde engine") {
  SUBCASE("zero drift adds the noise exactly") {
    FbmConfig cfg;
    cfg.hurst = 0.3;
    cfg.drift = Drift::table({-1.0, 1.0}, {0.0, 0.0});
    const FbmEngine e(cfg, 0.01);
    const auto p = e.make_noise(4, 0.0, 2.0);
    for (double t : {0.5, 1.0, 2.0}) CHECK(e.evolve(p, {0.5}, 0.0, t)[0] == 0.5 + p.value(t)[0]);
  }
  SUBCASE("linear drift with H = 1/2 matches an Euler oracle") {
    FbmConfig cfg;
    cfg.hurst = 0.5;
    cfg.drift = Drift::linear(1.0);
    const double dt = 1e-3;
    const FbmEngine e(cfg, dt);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto p = e.make_noise(seed, 0.0, 1.0);
      double oracle = 1.0;
      State x{1.0};
      double worst = 0.0;
      for (std::size_t k = 0; k + 1 < p.length(); ++k) {
        oracle += -oracle * dt + (p.at(k + 1)[0] - p.at(k)[0]);
        x = e.evolve(p, x, p.time_at(k), p.time_at(k + 1));
        worst = std::max(worst, std::abs(x[0] - oracle));
      }
      CHECK(worst <= 1e-3);
    }
  }
  SUBCASE("flows do not cross") {
    FbmConfig cfg;
    cfg.hurst = 0.3;
    cfg.drift = Drift::double_well();
    const FbmEngine e(cfg, 0.01);
    Rng rng(5);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto p = e.make_noise(1000 + trial, 0.0, 1.0);
      State x{rng.uniform(-2.0, 2.0)};
      State y{x[0] + rng.uniform(0.0, 1.0)};
      for (std::size_t k = 0; k + 1 < p.length(); ++k) {
        x = e.evolve(p, x, p.time_at(k), p.time_at(k + 1));
        y = e.evolve(p, y, p.time_at(k), p.time_at(k + 1));
        if (x[0] > y[0] + kDefaultOrderTolerance) ++violations;
      }
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("step_reflected") {
  const ReflectedConfig cfg{-1.0, 1.0, Drift::linear(-1.0)};
  CHECK(step_reflected(cfg, 0.2, 0.01, 0.01) == 0.2 + 0.2 * 0.01 + 0.01);
  CHECK(step_reflected(cfg, 1.0, 0.0, 0.01) == 1.0);
  CHECK(step_reflected(cfg, -1.0, -0.5, 0.01) == -1.0);
  CHECK_THROWS_AS(step_reflected(cfg, 1.5, 0.0, 0.01), DomainError);

  const ReflectedConfig dw{-1.0, 1.0, Drift::double_well()};
  // Lip(b) on [-1,1] is 2, so dt = 0.01 keeps the drift map monotone.
  Rng rng(6);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = std::min(1.0, x + rng.uniform(0.0, 0.5));
    const double w = 0.1 * rng.gaussian();
    if (step_reflected(dw, x, w, 0.01) > step_reflected(dw, y, w, 0.01)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("step_torus") {
  CHECK(step_torus(0.0, 0.7, 0.01) == 0.0);
  CHECK(step_torus(0.5, 0.0, 0.01) == 0.5);
  CHECK(step_torus(0.5, 8.0, 0.01) == 0.5);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(0.1, 0.9);
    const double a = 0.01 * rng.gaussian(), b = 0.01 * rng.gaussian();
    const double one = step_torus(x, a + b, 0.0);
    const double two = step_torus(step_torus(x, a, 0.0), b, 0.0);
    CHECK(std::abs(one - two) <= 10.0 * (a + b) * (a + b) + 10.0 * (a * a + b * b));
  }
  CHECK(torus_distance(0.05, 0.95) == doctest::Approx(0.1));
}

TEST_CASE("step_two_wall") {
  auto cfg = two_wall_config(8);
  cfg.drift = Drift::linear(0.0);
  const std::vector<double> zero(8, 0.0);
  CHECK(step_two_wall(cfg, zero, zero, 0.01) == zero);

  std::vector<double> kick(8, 0.0);
  kick[3] = 50.0;
  const auto out = step_two_wall(cfg, zero, kick, 0.01);
  CHECK(out[3] == 1.0);
  CHECK(out[0] < 1.0);

  std::vector<double> bad(8, 0.0);
  bad[2] = 2.0;
  CHECK_THROWS_AS(step_two_wall(cfg, bad, zero, 0.01), DomainError);

  auto walls = two_wall_config(4);
  walls.h2[1] = -1.0;
  CHECK_THROWS_AS(TwoWallEngine(walls, 0.01), InvalidArgument);

  const auto ordered = two_wall_config(32);
  Rng rng(8);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(32), y(32), w(32);
    for (std::size_t j = 0; j < 32; ++j) {
      x[j] = rng.uniform(-1.0, 1.0);
      y[j] = std::min(1.0, x[j] + rng.uniform(0.0, 0.5));
      w[j] = 0.1 * rng.gaussian();
    }
    const auto a = step_two_wall(ordered, x, w, 0.01);
    const auto b = step_two_wall(ordered, y, w, 0.01);
    for (std::size_t j = 0; j < 32; ++j)
      if (a[j] > b[j] + kDefaultOrderTolerance) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("domain invariance along trajectories") {
  const auto reflected = make_engine({ReflectedConfig{0.0, 1.0, Drift::linear(-2.0)}, 0.01});
  const auto torus = make_engine({TorusConfig{}, 0.01});
  const auto wall = make_engine({two_wall_config(), 0.01});
  for (const auto& e : {reflected, torus, wall}) {
    const auto p = e->make_noise(11, 0.0, 20.0);
    Rng rng(12);
    auto x = e->sample_state(rng);
    for (std::size_t k = 0; k + 1 < p.length(); ++k) {
      x = e->evolve(p, x, p.time_at(k), p.time_at(k + 1));
      CHECK_NOTHROW(e->validate_state(x));
    }
  }
}

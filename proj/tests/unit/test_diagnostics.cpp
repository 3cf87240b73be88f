#include <cmath>
#include <vector>

#include "doctest.h"
#include "syncrds/diagnostics.hpp"
#include "syncrds/error.hpp"
#include "syncrds/statistics.hpp"

using namespace syncrds;

namespace {

std::vector<double> firsts(const std::vector<State>& xs) {
  std::vector<double> out;
  for (const auto& x : xs) out.push_back(x[0]);
  return out;
}

SpmeConfig spme32() {
  SpmeConfig cfg;
  cfg.grid = {1.0, 32};
  cfg.qspec = QSpec::harmonic(32);
  return cfg;
}

}  // namespace

TEST_CASE("pullback") {
  const auto ou = make_engine({OuConfig{}, 1e-3});
  const auto p = ou->make_noise(1, -10.0, 0.0);
  CHECK(pullback(*ou, p, {2.5}, 0.0) == State{2.5});
  CHECK_THROWS_AS(pullback(*ou, p, {0.0}, 11.0), InvalidArgument);

  SUBCASE("contraction of differences") {
    const auto fine = make_engine({OuConfig{}, 1e-4});
    const auto q = fine->make_noise(2, -5.0, 0.0);
    const double ratio = (pullback(*fine, q, {3.0}, 5.0)[0] - pullback(*fine, q, {-1.0}, 5.0)[0]) / 4.0;
    CHECK(std::abs(ratio - std::exp(-5.0)) <= 0.02 * std::exp(-5.0) + 1e-6);
  }
  SUBCASE("Riemann-sum oracle for the attractor") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto path = ou->make_noise(seed, -10.0, 0.0);
      double oracle = 0.0;
      for (std::size_t k = 0; k + 1 < path.length(); ++k)
        oracle += std::exp(path.time_at(k)) * (path.at(k + 1)[0] - path.at(k)[0]);
      CHECK(std::abs(pullback(*ou, path, {0.0}, 10.0)[0] - oracle) <= 5e-3);
    }
  }
}

TEST_CASE("sync_curve") {
  const auto ou = make_engine({OuConfig{}, 0.01});
  SUBCASE("identical starts never separate") {
    const auto c = sync_curve(*ou, {0.3}, {0.3}, 0.1, {0.5, 1.0, 2.0}, 50, 1);
    for (const auto& r : c.rows) {
      CHECK(r.p_hat == 0.0);
      CHECK(r.ci_low == 0.0);
      CHECK(r.n_paths == 50);
    }
  }
  SUBCASE("ou gap closes at ln 10") {
    const auto c = sync_curve(*ou, {0.0}, {1.0}, 0.1, {1.0, 4.0}, 500, 2);
    CHECK(c.rows[0].p_hat == 1.0);
    CHECK(c.rows[1].p_hat == 0.0);
    for (const auto& r : c.rows) {
      CHECK(r.ci_low <= r.p_hat);
      CHECK(r.p_hat <= r.ci_high);
    }
  }
  SUBCASE("p_hat is non-increasing in epsilon") {
    const auto torus = make_engine({TorusConfig{}, 0.01});
    SyncOptions opt;
    opt.arbitrary_pairs = true;
    double prev = 1.0;
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.4}) {
      const auto c = sync_curve(*torus, {0.3}, {0.7}, eps, {5.0}, 100, 3, opt);
      CHECK(c.rows[0].p_hat <= prev);
      prev = c.rows[0].p_hat;
    }
  }
  SUBCASE("thread count does not change the result") {
    SyncOptions one, four;
    one.par.threads = 1;
    four.par.threads = 4;
    const auto a = sync_curve(*ou, {0.0}, {1.0}, 0.3, {1.0, 1.5}, 64, 9, one);
    const auto b = sync_curve(*ou, {0.0}, {1.0}, 0.3, {1.0, 1.5}, 64, 9, four);
    for (std::size_t r = 0; r < a.rows.size(); ++r) CHECK(a.rows[r].p_hat == b.rows[r].p_hat);
  }
  SUBCASE("errors") {
    const auto torus = make_engine({TorusConfig{}, 0.01});
    CHECK_THROWS_AS(sync_curve(*torus, {0.3}, {0.7}, 0.05, {1.0}, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(sync_curve(*ou, {1.0}, {0.0}, 0.1, {1.0}, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(sync_curve(*ou, {0.0}, {1.0}, 0.0, {1.0}, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(sync_curve(*ou, {0.0}, {1.0}, 0.1, {2.0, 1.0}, 10, 1), InvalidArgument);
  }
}

TEST_CASE("invariant_sampler") {
  SUBCASE("ou stationary law") {
    const auto ou = make_engine({OuConfig{}, 0.01});
    const auto s = invariant_sampler(*ou, {0.0}, 10.0, 1000, 1.0, 5);
    REQUIRE(s.states.size() == 1000);
    CHECK(s.times.front() == doctest::Approx(10.0));
    const auto xs = firsts(s.states);
    const double rho = std::exp(-1.0);
    const double n_eff = 1000.0 * (1.0 - rho) / (1.0 + rho);
    CHECK(std::abs(mean(xs)) <= 4.0 * std::sqrt(0.5 / n_eff));
    CHECK(std::abs(variance(xs) - 0.5) <= 0.1);
  }
  SUBCASE("torus samples stay on [0,1)") {
    const auto torus = make_engine({TorusConfig{}, 0.01});
    for (const auto& x : invariant_sampler(*torus, {0.4}, 1.0, 200, 0.5, 6).states) {
      CHECK(x[0] >= 0.0);
      CHECK(x[0] < 1.0);
    }
  }
  SUBCASE("spme running average respects the energy bound") {
    const auto cfg = spme32();
    const auto e = make_engine({cfg, 0.01});
    Rng rng(7);
    const State x0 = e->sample_state(rng);
    const double m = cfg.m;
    const auto obs = [&](const State& x) {
      return std::pow(norm(GridFunction(cfg.grid, x), NormKind::Lp, m + 1), m + 1);
    };
    const auto s = invariant_sampler(*e, x0, 1.0, 10, 1.0, 8, obs);
    const double h0 = std::pow(norm(GridFunction(cfg.grid, x0), NormKind::Hminus1), 2);
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      CAPTURE(s.times[i]);
      CHECK(s.running_average[i] <= h0 / s.times[i] + cfg.qspec.trace() * 1.5);
    }
  }
}

TEST_CASE("equilibrium_pushforward") {
  const double dt = 0.01;
  const auto ou = make_engine({OuConfig{}, dt});
  const auto p = ou->make_noise(3, -5.0, 0.0);
  const std::vector<State> mu{{-2.0}, {-0.5}, {0.4}, {1.5}};
  const auto c0 = equilibrium_pushforward(*ou, p, mu, 0.0);
  CHECK(c0.states == mu);
  CHECK(c0.diameter == 3.5);
  CHECK(equilibrium_pushforward(*ou, p, {{1.0}}, 3.0).diameter == 0.0);
  for (double T : {1.0, 2.0, 5.0}) {
    const auto c = equilibrium_pushforward(*ou, p, mu, T);
    CHECK(c.diameter <= std::exp(-T) * c0.diameter + 10 * dt);
    double w = 0.0;
    for (double x : c.weights) w += x;
    CHECK(w == doctest::Approx(1.0));
  }
  FbmConfig fbm;
  fbm.hurst = 0.7;
  const auto f = make_engine({fbm, dt});
  CHECK_THROWS_AS(equilibrium_pushforward(*f, f->make_noise(1, -1.0, 0.0), {{0.0}}, 1.0),
                  InvalidArgument);
}

TEST_CASE("equilibrium_cesaro") {
  const double dt = 0.01;
  const auto ou = make_engine({OuConfig{}, dt});
  const auto p = ou->make_noise(4, -5.0, 0.0);
  const std::vector<State> mu{{-2.0}, {0.0}, {1.0}};
  const auto tiny = equilibrium_cesaro(*ou, p, mu, {dt});
  CHECK(tiny.diameter == doctest::Approx(3.0).epsilon(0.02));
  const auto c = equilibrium_cesaro(*ou, p, mu, {2.0, 3.0, 5.0});
  CHECK(c.states.size() == 9);
  CHECK(c.diameter <= std::exp(-2.0) * 3.0 + 10 * dt);
  const Interval iv(GridFunction({1.0, 1}, {-10.0}), GridFunction({1.0, 1}, {10.0}), OrderRelation{});
  CHECK(equilibrium_cesaro(*ou, p, mu, {1.0}, &iv).interval_mass.value() == doctest::Approx(1.0));
  CHECK_THROWS_AS(equilibrium_cesaro(*ou, p, mu, {}), InvalidArgument);

  SUBCASE("fbm contraction from r = 2 to r = 20") {
    FbmConfig fbm;
    fbm.hurst = 0.7;
    fbm.drift = Drift::linear(1.0);
    const auto e = make_engine({fbm, 0.01});
    int smaller = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto path = e->make_noise(seed, -20.0, 0.0);
      const std::vector<State> mus{{-2.0}, {-1.0}, {0.0}, {1.0}, {2.0}};
      const auto short_cloud = equilibrium_cesaro(*e, path, mus, {0.5, 1.0, 1.5, 2.0});
      const auto long_cloud = equilibrium_cesaro(*e, path, mus, {5.0, 10.0, 15.0, 20.0});
      // Compare the clouds at the longest horizons of each grid.
      const auto s = equilibrium_cesaro(*e, path, mus, {2.0});
      const auto l = equilibrium_cesaro(*e, path, mus, {20.0});
      if (l.diameter < s.diameter) ++smaller;
      CHECK(long_cloud.diameter <= short_cloud.diameter);
    }
    // Sign test at the 5% level needs at least 15 of 20.
    CHECK(smaller >= 15);
  }
}

TEST_CASE("interval_concentration") {
  const GridSpec g{1.0, 4};
  std::vector<GridFunction> same(40, GridFunction(g, {0.1, 0.2, 0.3, 0.4}));
  CHECK(interval_concentration(same, OrderRelation{}, 0.05).coverage == 1.0);
  CHECK(interval_concentration(same, OrderRelation{OrderKind::dual_preceq}, 0.2).coverage == 1.0);
  CHECK_THROWS_AS(interval_concentration(std::vector<GridFunction>(10, same[0]), OrderRelation{}, 0.05),
                  InvalidArgument);
  CHECK_THROWS_AS(interval_concentration(same, OrderRelation{}, 0.6), InvalidArgument);

  const auto ou = make_engine({OuConfig{}, 0.01});
  std::vector<GridFunction> xs;
  for (const auto& s : invariant_sampler(*ou, {0.0}, 10.0, 1000, 1.0, 11).states)
    xs.emplace_back(GridSpec{1.0, 1}, s);
  const auto r = interval_concentration(xs, OrderRelation{}, 0.05);
  CHECK(r.n_fit == 500);
  CHECK(r.n_eval == 500);
  CHECK(r.coverage >= 0.85);
}

TEST_CASE("law_distance") {
  const std::vector<State> a{{0.1}, {0.5}, {-0.3}};
  CHECK(law_distance(a, a, LawMetric::ks_scalar) == 0.0);
  CHECK(law_distance({{0.0}, {0.0}}, {{1.0}}, LawMetric::ks_scalar) == 1.0);
  const std::vector<State> g{{0.1, 0.2}, {0.3, -0.1}};
  CHECK(law_distance(g, g, LawMetric::energy_grid, {1.0, 2}) == 0.0);
  CHECK(law_distance(g, {{5.0, 5.0}}, LawMetric::energy_grid, {1.0, 2}) > 0.0);
  CHECK_THROWS_AS(law_distance(a, g, LawMetric::ks_scalar), InvalidArgument);
  CHECK_THROWS_AS(law_distance(g, g, LawMetric::ks_scalar), InvalidArgument);

  const auto ou = make_engine({OuConfig{}, 0.01});
  const auto lo = forward_samples(*ou, {-5.0}, 10.0, 1000, 21);
  const auto hi = forward_samples(*ou, {5.0}, 10.0, 1000, 22);
  CHECK(law_distance(lo, hi, LawMetric::ks_scalar) < ks_critical_5pct(1000, 1000));
}

TEST_CASE("order_preservation_test") {
  const auto spme = make_engine({spme32(), 0.01});
  const auto same = order_preservation_test(*spme, OrderRelation{}, 20, 0.5, 1, true);
  CHECK(same.violations == 0);
  CHECK(same.worst_violation == 0.0);
  const auto rep = order_preservation_test(*spme, OrderRelation{}, 100, 1.0, 2);
  CHECK(rep.trials == 100);
  CHECK(rep.violations == 0);
  const auto dual = order_preservation_test(*spme, OrderRelation{OrderKind::dual_preceq}, 50, 1.0, 3);
  CHECK(dual.trials == 50);
  const auto ou = make_engine({OuConfig{}, 0.01});
  CHECK(order_preservation_test(*ou, OrderRelation{}, 100, 1.0, 4).violations == 0);
  CHECK_THROWS_AS(order_preservation_test(*ou, OrderRelation{OrderKind::dual_preceq}, 10, 1.0, 4),
                  InvalidArgument);
}

TEST_CASE("attractor_estimate and monotone bracketing") {
  const double dt = 0.01;
  const auto ou = make_engine({OuConfig{}, dt});
  const auto p = ou->make_noise(5, -10.0, 0.0);
  CHECK(attractor_estimate(*ou, p, {{0.7}}, 10.0).spread == 0.0);
  const auto est = attractor_estimate(*ou, p, {{-1.0}, {0.0}, {1.0}}, 10.0, 5);
  CHECK(est.spread <= 2.0 * std::exp(-10.0) + 10 * dt);
  CHECK(est.path_seed == 5);
  CHECK(est.a_hat == pullback(*ou, p, {0.0}, 10.0));

  const auto spme = make_engine({spme32(), dt});
  const auto q = spme->make_noise(6, -2.0, 0.0);
  Rng rng(3);
  const State z = spme->sample_state(rng);
  State x = z, y = z;
  for (std::size_t j = 0; j < z.size(); ++j) {
    x[j] -= 0.3;
    y[j] += 0.2 * static_cast<double>(j % 3);
  }
  const auto px = pullback(*spme, q, x, 2.0);
  const auto pz = pullback(*spme, q, z, 2.0);
  const auto py = pullback(*spme, q, y, 2.0);
  CHECK(engine_ordered(*spme, px, pz));
  CHECK(engine_ordered(*spme, pz, py));
}

#include "syncrds/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "syncrds/error.hpp"
#include "syncrds/statistics.hpp"

namespace syncrds {

namespace {

// Engine-step-aligned time, rejecting anything off the grid.
double aligned(const Engine& engine, double t, const char* who) {
  const double k = t / engine.dt();
  if (std::abs(k - std::round(k)) > 1e-6) {
    std::ostringstream msg;
    msg << who << ": time " << t << " is not a multiple of the engine step " << engine.dt();
    throw InvalidArgument(msg.str());
  }
  return std::round(k) * engine.dt();
}

NoisePath noise_window(const Engine& engine, std::uint64_t seed, double t0, double t1) {
  // Zero-length windows still need a two-sample path.
  if (t1 <= t0) t1 = t0 + engine.dt();
  return engine.make_noise(seed, t0, t1);
}

}  // namespace

State pullback(const Engine& engine, const NoisePath& path, const State& x, double T) {
  if (T < 0.0) throw InvalidArgument("pullback: horizon must be nonnegative");
  if (!path.covers(-T, 0.0)) {
    std::ostringstream msg;
    msg << "pullback: path window [" << path.t_start() << ", " << path.t_end()
        << "] does not cover [" << -T << ", 0]";
    throw InvalidArgument(msg.str());
  }
  return engine.evolve(path, x, -T, 0.0);
}

bool engine_ordered(const Engine& engine, const State& x, const State& y, double tol) {
  if (x.size() != y.size()) return false;
  if (engine.kind() == EngineKind::torus) return x == y;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] <= y[j] + tol)) return false;
  }
  return true;
}

SyncCurve sync_curve(const Engine& engine, const State& x, const State& y, double epsilon,
                     std::vector<double> times, std::size_t n_paths, std::uint64_t seed,
                     const SyncOptions& options) {
  if (!(epsilon > 0.0)) throw InvalidArgument("sync_curve: epsilon must be positive");
  if (n_paths == 0) throw InvalidArgument("sync_curve: need at least one path");
  if (times.empty()) throw InvalidArgument("sync_curve: empty time list");
  engine.validate_state(x);
  engine.validate_state(y);
  if (!options.arbitrary_pairs && !engine_ordered(engine, x, y)) {
    throw InvalidArgument(
        "sync_curve: starting states are not ordered (x <= y) under the engine's order; "
        "enable arbitrary-pair mode to compare unordered states");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) throw InvalidArgument("sync_curve: negative time");
    times[i] = aligned(engine, times[i], "sync_curve");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InvalidArgument("sync_curve: times must be strictly increasing");
    }
  }

  const double t_max = times.back();
  // apart[i * nt + r]: path i separated at times[r]
  const std::size_t nt = times.size();
  std::vector<unsigned char> apart(n_paths * nt, 0);
  parallel_for(n_paths, options.par, [&](std::size_t i) {
    const NoisePath path = noise_window(engine, stream_seed(seed, i), 0.0, t_max);
    State a = x, b = y;
    double t = 0.0;
    for (std::size_t r = 0; r < nt; ++r) {
      a = engine.evolve(path, std::move(a), t, times[r]);
      b = engine.evolve(path, std::move(b), t, times[r]);
      t = times[r];
      apart[i * nt + r] = engine.distance(a, b) > epsilon ? 1 : 0;
    }
  });

  SyncCurve curve;
  curve.epsilon = epsilon;
  for (std::size_t r = 0; r < nt; ++r) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_paths; ++i) k += apart[i * nt + r];
    const auto ci = wilson_interval(k, n_paths);
    curve.rows.push_back({times[r], static_cast<double>(k) / static_cast<double>(n_paths),
                          ci.low, ci.high, n_paths});
  }
  return curve;
}

InvariantSamples invariant_sampler(const Engine& engine, const State& x0, double burn_in,
                                   std::size_t n, double gap, std::uint64_t seed,
                                   const std::function<double(const State&)>& observable) {
  if (!(burn_in > 0.0) || !(gap > 0.0)) {
    throw InvalidArgument("invariant_sampler: burn_in and gap must be positive");
  }
  if (n == 0) throw InvalidArgument("invariant_sampler: need at least one sample");
  burn_in = aligned(engine, burn_in, "invariant_sampler");
  gap = aligned(engine, gap, "invariant_sampler");
  const double t_end = burn_in + static_cast<double>(n - 1) * gap;
  const NoisePath path = noise_window(engine, seed, 0.0, t_end);

  InvariantSamples out;
  State x = x0;
  engine.validate_state(x);
  double t = 0.0;
  double integral = 0.0;
  const double dt = engine.dt();
  const auto steps_to = [&](double target) {
    return static_cast<std::size_t>(std::llround((target - t) / dt));
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double target = burn_in + static_cast<double>(i) * gap;
    if (observable) {
      const std::size_t steps = steps_to(target);
      const std::size_t k0 = static_cast<std::size_t>(std::llround(t / dt));
      for (std::size_t s = 0; s < steps; ++s) {
        integral += observable(x) * dt;
        const double ta = static_cast<double>(k0 + s) * dt;
        const double tb = static_cast<double>(k0 + s + 1) * dt;
        x = engine.evolve(path, std::move(x), ta, tb);
      }
    } else {
      x = engine.evolve(path, std::move(x), t, target);
    }
    t = target;
    out.states.push_back(x);
    out.times.push_back(t);
    if (observable) out.running_average.push_back(integral / t);
  }
  return out;
}

double cloud_diameter(const Engine& engine, const std::vector<State>& states,
                      const Parallelism& par) {
  const std::size_t n = states.size();
  if (n < 2) return 0.0;
  std::vector<double> row_max(n, 0.0);
  parallel_for(n, par, [&](std::size_t i) {
    double m = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, engine.distance(states[i], states[j]));
    row_max[i] = m;
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

EquilibriumCloud equilibrium_pushforward(const Engine& engine, const NoisePath& path,
                                         const std::vector<State>& mu_samples, double T,
                                         const Parallelism& par) {
  if (!engine.white_noise()) {
    throw InvalidArgument(
        "equilibrium_pushforward: engine noise is not white; use the Cesaro estimator");
  }
  if (mu_samples.empty()) throw InvalidArgument("equilibrium_pushforward: no samples");
  EquilibriumCloud cloud;
  cloud.t_pullback = T;
  cloud.states.resize(mu_samples.size());
  parallel_for(mu_samples.size(), par, [&](std::size_t j) {
    cloud.states[j] = pullback(engine, path, mu_samples[j], T);
  });
  cloud.weights.assign(mu_samples.size(), 1.0 / static_cast<double>(mu_samples.size()));
  cloud.diameter = cloud_diameter(engine, cloud.states, par);
  return cloud;
}

EquilibriumCloud equilibrium_cesaro(const Engine& engine, const NoisePath& path,
                                    const std::vector<State>& mu_samples,
                                    const std::vector<double>& r_grid, const Interval* interval,
                                    const Parallelism& par) {
  if (r_grid.empty()) throw InvalidArgument("equilibrium_cesaro: empty horizon grid");
  if (mu_samples.empty()) throw InvalidArgument("equilibrium_cesaro: no samples");
  double r_max = 0.0;
  for (double r : r_grid) {
    if (!(r > 0.0)) throw InvalidArgument("equilibrium_cesaro: horizons must be positive");
    aligned(engine, r, "equilibrium_cesaro");
    r_max = std::max(r_max, r);
  }
  const std::size_t n = mu_samples.size();
  const std::size_t total = r_grid.size() * n;
  EquilibriumCloud cloud;
  cloud.t_pullback = r_max;
  cloud.states.resize(total);
  parallel_for(total, par, [&](std::size_t idx) {
    cloud.states[idx] = pullback(engine, path, mu_samples[idx % n], r_grid[idx / n]);
  });
  cloud.weights.assign(total, 1.0 / static_cast<double>(total));
  cloud.diameter = cloud_diameter(engine, cloud.states, par);
  if (interval) {
    double mass = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (interval_contains(*interval, as_grid_function(engine, cloud.states[i]))) {
        mass += cloud.weights[i];
      }
    }
    cloud.interval_mass = mass;
  }
  return cloud;
}

IntervalConcentration interval_concentration(const std::vector<GridFunction>& samples,
                                             const OrderRelation& order, double alpha) {
  if (samples.size() < 20) throw InvalidArgument("interval_concentration: need at least 20 samples");
  if (!(alpha > 0.0 && alpha < 0.5)) throw InvalidArgument("interval_concentration: alpha must lie in (0, 0.5)");
  order.validate();
  const GridSpec spec = samples.front().spec();
  for (const auto& s : samples) require_same_grid(samples.front(), s, "interval_concentration");

  const std::size_t n_fit = samples.size() / 2;
  const std::size_t n_eval = samples.size() - n_fit;
  const std::size_t nodes = spec.n_interior;
  std::vector<GridFunction> rep;
  rep.reserve(n_fit);
  for (std::size_t i = 0; i < n_fit; ++i) rep.push_back(order_representation(order, samples[i]));

  std::vector<double> lo(nodes), hi(nodes), column(n_fit);
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t i = 0; i < n_fit; ++i) column[i] = rep[i][j];
    const double sd = std::sqrt(variance(column));
    lo[j] = quantile(column, alpha) - sd;
    hi[j] = quantile(column, 1.0 - alpha) + sd;
  }
  GridFunction lower(spec, lo), upper(spec, hi);
  if (order.kind == OrderKind::dual_preceq) {
    // Map the bounds back: solve(-Delta_h f_v) = f_v.
    lower = -1.0 * laplacian_apply(lower);
    upper = -1.0 * laplacian_apply(upper);
  }
  IntervalConcentration out{Interval(std::move(lower), std::move(upper), order), 0.0, n_fit, n_eval};
  std::size_t inside = 0;
  for (std::size_t i = n_fit; i < samples.size(); ++i) {
    if (interval_contains(out.interval, samples[i])) ++inside;
  }
  out.coverage = static_cast<double>(inside) / static_cast<double>(n_eval);
  return out;
}

double law_distance(const std::vector<State>& a, const std::vector<State>& b, LawMetric metric,
                    const GridSpec& grid) {
  if (a.empty() || b.empty()) throw InvalidArgument("law_distance: empty sample");
  const std::size_t dim = a.front().size();
  for (const auto* set : {&a, &b}) {
    for (const auto& s : *set) {
      if (s.size() != dim) throw InvalidArgument("law_distance: state shape mismatch");
    }
  }
  if (metric == LawMetric::ks_scalar) {
    if (dim != 1) throw InvalidArgument("law_distance: KS needs scalar states");
    std::vector<double> xa, xb;
    for (const auto& s : a) xa.push_back(s[0]);
    for (const auto& s : b) xb.push_back(s[0]);
    return ks_statistic(std::move(xa), std::move(xb));
  }
  if (grid.n_interior != dim) throw InvalidArgument("law_distance: grid does not match state size");
  const double h = grid.h();
  auto l2 = [h](const State& u, const State& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += (u[j] - v[j]) * (u[j] - v[j]);
    return std::sqrt(h * s);
  };
  return energy_distance(
      a.size(), b.size(), [&](std::size_t i, std::size_t j) { return l2(a[i], b[j]); },
      [&](std::size_t i, std::size_t j) { return l2(a[i], a[j]); },
      [&](std::size_t i, std::size_t j) { return l2(b[i], b[j]); });
}

std::vector<State> forward_samples(const Engine& engine, const State& x, double t,
                                   std::size_t n, std::uint64_t seed, const Parallelism& par) {
  t = aligned(engine, t, "forward_samples");
  std::vector<State> out(n);
  parallel_for(n, par, [&](std::size_t i) {
    const NoisePath path = noise_window(engine, stream_seed(seed, i), 0.0, t);
    out[i] = engine.evolve(path, x, 0.0, t);
  });
  return out;
}

std::vector<State> pullback_samples(const Engine& engine, const State& x, double t,
                                    std::size_t n, std::uint64_t seed, const Parallelism& par) {
  t = aligned(engine, t, "pullback_samples");
  std::vector<State> out(n);
  parallel_for(n, par, [&](std::size_t i) {
    const NoisePath path = noise_window(engine, stream_seed(seed, i), -t, 0.0);
    out[i] = pullback(engine, path, x, t);
  });
  return out;
}

OrderReport order_preservation_test(const Engine& engine, const OrderRelation& order,
                                    std::size_t trials, double t_horizon, std::uint64_t seed,
                                    bool identical_pairs, const Parallelism& par) {
  if (trials == 0) throw InvalidArgument("order_preservation_test: need at least one trial");
  order.validate();
  if (order.kind == OrderKind::dual_preceq && engine.kind() != EngineKind::spme) {
    throw InvalidArgument("order_preservation_test: the dual order applies to the spme engine only");
  }
  t_horizon = aligned(engine, t_horizon, "order_preservation_test");
  const GridSpec spec = engine.state_grid();
  const double h = spec.h();

  std::vector<double> excess(trials, 0.0);
  parallel_for(trials, par, [&](std::size_t i) {
    Rng rng(stream_seed(seed ^ 0x5bd1e995ULL, i));
    State x = engine.sample_state(rng);
    State y = x;
    if (!identical_pairs) {
      if (order.kind == OrderKind::pointwise_leq) {
        for (double& v : y) v += 0.5 * rng.uniform();
        y = engine.project(std::move(y));
      } else {
        // y = x + (-Delta_h) v with v >= 0 nodally, so x precedes y.
        std::vector<double> v(y.size());
        for (double& vj : v) vj = h * h * rng.uniform();
        const GridFunction bump = -1.0 * laplacian_apply(GridFunction(spec, v));
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += bump[j];
      }
    }
    const NoisePath path = noise_window(engine, stream_seed(seed, i), 0.0, t_horizon);
    const State fx = engine.evolve(path, x, 0.0, t_horizon);
    const State fy = engine.evolve(path, y, 0.0, t_horizon);
    excess[i] = order_excess(order, GridFunction(spec, fx), GridFunction(spec, fy));
  });

  OrderReport rep;
  rep.order = order;
  rep.trials = trials;
  for (double e : excess) {
    if (e > order.tol) ++rep.violations;
    rep.worst_violation = std::max(rep.worst_violation, e);
  }
  return rep;
}

AttractorEstimate attractor_estimate(const Engine& engine, const NoisePath& path,
                                     const std::vector<State>& init_set, double T,
                                     std::uint64_t path_seed) {
  if (init_set.empty()) throw InvalidArgument("attractor_estimate: empty initial set");
  std::vector<State> images;
  images.reserve(init_set.size());
  for (const auto& x : init_set) images.push_back(pullback(engine, path, x, T));
  AttractorEstimate est;
  est.a_hat = images[init_set.size() / 2];
  est.spread = cloud_diameter(engine, images, Parallelism{1});
  est.t_pullback = T;
  est.path_seed = path_seed;
  return est;
}

}  // namespace syncrds

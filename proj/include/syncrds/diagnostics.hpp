#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "syncrds/engines.hpp"
#include "syncrds/noise.hpp"
#include "syncrds/orders.hpp"
#include "syncrds/parallel.hpp"

namespace syncrds {

/// phi_T(theta_{-T} omega, x): evolve on `path` from -T to 0.
State pullback(const Engine& engine, const NoisePath& path, const State& x, double T);

/// The engine's own order on states: nodal for the real-valued engines, the
/// trivial order (equality) on the torus.
bool engine_ordered(const Engine& engine, const State& x, const State& y,
                    double tol = kDefaultOrderTolerance);

struct SyncRow {
  double t = 0.0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::size_t n_paths = 0;
};

/// Fraction of paths on which the two trajectories are more than epsilon
/// apart, with Wilson 95% intervals.
struct SyncCurve {
  double epsilon = 0.0;
  std::vector<SyncRow> rows;
};

struct SyncOptions {
  bool arbitrary_pairs = false;  // skip the x <= y precondition
  Parallelism par;
};

SyncCurve sync_curve(const Engine& engine, const State& x, const State& y, double epsilon,
                     std::vector<double> times, std::size_t n_paths, std::uint64_t seed,
                     const SyncOptions& options = {});

struct InvariantSamples {
  std::vector<State> states;
  std::vector<double> times;
  /// (1/t) int_0^t f(X_r) dr at each recorded time, when an observable is given.
  std::vector<double> running_average;
};

/// One forward trajectory from x0: discard [0, burn_in), then record a state
/// every `gap` starting at burn_in.
InvariantSamples invariant_sampler(const Engine& engine, const State& x0, double burn_in,
                                   std::size_t n, double gap, std::uint64_t seed,
                                   const std::function<double(const State&)>& observable = {});

/// Weighted cloud of states approximating a statistical equilibrium.
struct EquilibriumCloud {
  std::vector<State> states;
  std::vector<double> weights;
  double t_pullback = 0.0;
  double diameter = 0.0;
  std::optional<double> interval_mass;  // weighted fraction inside a supplied interval
};

/// Largest pairwise engine distance (exact, O(n^2)).
double cloud_diameter(const Engine& engine, const std::vector<State>& states,
                      const Parallelism& par = {});

/// Pullback of every mu sample to time 0 from horizon T on one path.
EquilibriumCloud equilibrium_pushforward(const Engine& engine, const NoisePath& path,
                                         const std::vector<State>& mu_samples, double T,
                                         const Parallelism& par = {});

/// Union of pullback clouds over the horizons in r_grid with uniform weights
/// over (r, sample) pairs.
EquilibriumCloud equilibrium_cesaro(const Engine& engine, const NoisePath& path,
                                    const std::vector<State>& mu_samples,
                                    const std::vector<double>& r_grid,
                                    const Interval* interval = nullptr,
                                    const Parallelism& par = {});

struct IntervalConcentration {
  Interval interval;
  double coverage = 0.0;
  std::size_t n_fit = 0;
  std::size_t n_eval = 0;
};

/// Nodal alpha and 1-alpha quantiles, widened by one standard deviation, of
/// the first half of the samples (taken in the order's representation); the
/// coverage is measured on the second half.
IntervalConcentration interval_concentration(const std::vector<GridFunction>& samples,
                                             const OrderRelation& order, double alpha);

enum class LawMetric { ks_scalar, energy_grid };

/// KS statistic for scalar states, energy distance under the grid L2 norm
/// otherwise.
double law_distance(const std::vector<State>& a, const std::vector<State>& b, LawMetric metric,
                    const GridSpec& grid = {1.0, 1});

/// Endpoints phi_t(omega_i, x) over independent paths started at time 0.
std::vector<State> forward_samples(const Engine& engine, const State& x, double t,
                                   std::size_t n, std::uint64_t seed,
                                   const Parallelism& par = {});

/// phi_t(theta_{-t} omega_i, x) over independent paths on [-t, 0].
std::vector<State> pullback_samples(const Engine& engine, const State& x, double t,
                                    std::size_t n, std::uint64_t seed,
                                    const Parallelism& par = {});

struct OrderReport {
  OrderRelation order;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_violation = 0.0;  // largest order excess beyond 0, over all trials
};

/// Evolves random ordered pairs (x, x + order-positive perturbation) on
/// shared paths and counts pairs whose images are not ordered within tol.
OrderReport order_preservation_test(const Engine& engine, const OrderRelation& order,
                                    std::size_t trials, double t_horizon, std::uint64_t seed,
                                    bool identical_pairs = false, const Parallelism& par = {});

struct AttractorEstimate {
  State a_hat;
  double spread = 0.0;
  double t_pullback = 0.0;
  std::uint64_t path_seed = 0;
};

/// a_hat is the pullback of the middle element of init_set; spread is the
/// diameter of the pullback images of init_set at horizon T.
AttractorEstimate attractor_estimate(const Engine& engine, const NoisePath& path,
                                     const std::vector<State>& init_set, double T,
                                     std::uint64_t path_seed = 0);

}  // namespace syncrds

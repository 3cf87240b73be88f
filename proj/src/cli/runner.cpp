#include "syncrds/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "syncrds/cli/config.hpp"
#include "syncrds/cli/report.hpp"
#include "syncrds/diagnostics.hpp"
#include "syncrds/error.hpp"
#include "syncrds/statistics.hpp"

namespace syncrds::cli {

namespace {

constexpr const char* kToolVersion = "1.0.0";

// Independent streams for the pieces of one experiment.
constexpr std::uint64_t kMuStream = 0x6d75ULL;
constexpr std::uint64_t kSecondStream = 0x79ULL;

struct Outcome {
  Table table;
  Json extra = Json::object();
  std::string plot_x, plot_y;
  const NoisePath* noise = nullptr;
  std::optional<NoisePath> owned_noise;
};

struct Context {
  ExperimentConfig& cfg;
  EnginePtr engine;
  Section params;
};

double step_aligned(const Engine& e, double t, const std::string& where) {
  const double k = t / e.dt();
  if (std::abs(k - std::round(k)) > 1e-6) {
    std::ostringstream msg;
    msg << where << ": " << t << " is not a multiple of noise.dt = " << e.dt();
    throw ConfigError(msg.str());
  }
  return std::round(k) * e.dt();
}

State state_param(Context& c, const std::string& key, std::optional<State> def) {
  const Engine& e = *c.engine;
  if (!c.params.has(key)) {
    if (!def) throw ConfigError("missing key " + c.params.key_path(key));
    c.params.value(key) = *def;
    return *def;
  }
  const State x = parse_state(c.params.value(key), e.state_dim(), e.state_grid().length,
                              c.cfg.base_dir, c.params.key_path(key));
  try {
    e.validate_state(x);
  } catch (const DomainError& err) {
    throw ConfigError(c.params.key_path(key) + ": " + err.what());
  }
  return x;
}

OrderRelation order_param(Context& c) {
  const std::string name = c.params.string("order", "pointwise");
  const double tol = c.params.number("tol", kDefaultOrderTolerance);
  if (name == "pointwise") return {OrderKind::pointwise_leq, tol};
  if (name == "dual") return {OrderKind::dual_preceq, tol};
  throw ConfigError(c.params.key_path("order") + ": expected pointwise or dual");
}

Json state_json(const State& x) {
  if (x.size() == 1) return x[0];
  return Json(x);
}

double dist0(const Engine& e, const State& x) { return e.distance(x, State(x.size(), 0.0)); }

struct SamplerParams {
  State x0;
  double burn_in, gap;
  std::size_t n;
};

SamplerParams sampler_params(Context& c, const std::string& key, std::size_t default_n) {
  Context sub{c.cfg, c.engine, c.params.child(key)};
  Section& s = sub.params;
  SamplerParams p;
  p.x0 = state_param(sub, "x0", c.engine->default_state());
  p.burn_in = step_aligned(*c.engine, s.number("burn_in", 10.0), s.key_path("burn_in"));
  p.gap = step_aligned(*c.engine, s.number("gap", 1.0), s.key_path("gap"));
  p.n = s.count("n", default_n);
  if (p.n == 0) throw ConfigError(s.key_path("n") + ": must be positive");
  s.finish();
  return p;
}

std::vector<State> draw_samples(const Context& c, const SamplerParams& p) {
  return invariant_sampler(*c.engine, p.x0, p.burn_in, p.n, p.gap,
                           stream_seed(c.cfg.seed, kMuStream))
      .states;
}

// ---------------------------------------------------------------- diagnostics

Outcome run_simulate(Context& c) {
  const Engine& e = *c.engine;
  const State x = state_param(c, "x", e.default_state());
  const double t0 = step_aligned(e, c.params.number("t0", 0.0), c.params.key_path("t0"));
  const double t1 = step_aligned(e, c.params.number("t1"), c.params.key_path("t1"));
  if (!(t1 > t0)) throw ConfigError(c.params.key_path("t1") + ": must exceed t0");
  const double every = step_aligned(
      e, c.params.number("record_every", std::max(e.dt(), std::round((t1 - t0) / 100.0 / e.dt()) * e.dt())),
      c.params.key_path("record_every"));
  if (!(every > 0.0)) throw ConfigError(c.params.key_path("record_every") + ": must be positive");
  c.params.finish();

  Outcome o;
  o.owned_noise = e.make_noise(c.cfg.seed, t0, t1);
  o.noise = &*o.owned_noise;
  o.table.columns = {"t", "dist0"};
  const bool scalar = e.state_dim() == 1;
  if (scalar) {
    o.table.columns.push_back("x");
  } else {
    for (std::size_t j = 1; j <= e.state_dim(); ++j) o.table.columns.push_back("x_" + std::to_string(j));
  }
  auto record = [&](double t, const State& s) {
    std::vector<Json> row{t, dist0(e, s)};
    for (double v : s) row.emplace_back(v);
    o.table.add(std::move(row));
  };
  State s = x;
  double t = t0;
  record(t, s);
  const auto n_rec = static_cast<std::size_t>(std::llround((t1 - t0) / every));
  for (std::size_t i = 1; i <= n_rec; ++i) {
    const double next = std::min(t1, t0 + static_cast<double>(i) * every);
    s = e.evolve(*o.noise, std::move(s), t, next);
    t = next;
    record(t, s);
  }
  if (t < t1) {
    s = e.evolve(*o.noise, std::move(s), t, t1);
    record(t1, s);
  }
  o.extra["final_state"] = state_json(s);
  o.plot_x = "t";
  o.plot_y = scalar ? "x" : "dist0";
  return o;
}

Outcome run_pullback(Context& c) {
  const Engine& e = *c.engine;
  std::vector<State> init;
  if (c.params.has("init")) {
    Json& list = c.params.value("init");
    if (!list.is_array() || list.empty()) {
      throw ConfigError(c.params.key_path("init") + ": expected a non-empty list of states");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto where = c.params.key_path("init") + "[" + std::to_string(i) + "]";
      init.push_back(parse_state(list[i], e.state_dim(), e.state_grid().length, c.cfg.base_dir, where));
      e.validate_state(init.back());
    }
  } else {
    init.push_back(state_param(c, "x", e.default_state()));
  }
  auto horizons = c.params.numbers("horizons");
  if (horizons.empty()) throw ConfigError(c.params.key_path("horizons") + ": empty");
  for (double& T : horizons) {
    if (T < 0.0) throw ConfigError(c.params.key_path("horizons") + ": negative horizon");
    T = step_aligned(e, T, c.params.key_path("horizons"));
  }
  c.params.finish();

  const double t_max = *std::max_element(horizons.begin(), horizons.end());
  Outcome o;
  o.owned_noise = e.make_noise(c.cfg.seed, -std::max(t_max, e.dt()), 0.0);
  o.noise = &*o.owned_noise;
  o.table.columns = {"t_pullback", "spread", "a_hat_dist0"};
  Json a_hats = Json::array();
  for (double T : horizons) {
    const auto est = attractor_estimate(e, *o.noise, init, T, c.cfg.seed);
    o.table.add({T, est.spread, dist0(e, est.a_hat)});
    a_hats.push_back(state_json(est.a_hat));
  }
  o.extra["a_hat"] = a_hats;
  o.plot_x = "t_pullback";
  o.plot_y = "spread";
  return o;
}

Outcome run_sync_curve(Context& c) {
  const Engine& e = *c.engine;
  const State x = state_param(c, "x", std::nullopt);
  const State y = state_param(c, "y", std::nullopt);
  const double eps = c.params.number("epsilon");
  const auto times = c.params.numbers("times");
  const std::size_t n_paths = c.params.count("n_paths", 500);
  SyncOptions opt;
  opt.arbitrary_pairs = c.params.boolean("arbitrary_pairs", false);
  opt.par = c.cfg.par;
  c.params.finish();

  const auto curve = sync_curve(e, x, y, eps, times, n_paths, c.cfg.seed, opt);
  Outcome o;
  o.table.columns = {"t", "epsilon", "p_hat", "ci_low", "ci_high", "n_paths"};
  for (const auto& r : curve.rows) o.table.add({r.t, curve.epsilon, r.p_hat, r.ci_low, r.ci_high, r.n_paths});
  o.plot_x = "t";
  o.plot_y = "p_hat";
  return o;
}

Outcome run_equilibrium(Context& c) {
  const Engine& e = *c.engine;
  const std::string mode = c.params.string("mode", "pushforward");
  if (mode != "pushforward" && mode != "cesaro") {
    throw ConfigError(c.params.key_path("mode") + ": expected pushforward or cesaro");
  }
  auto horizons = c.params.numbers("horizons");
  if (horizons.empty()) throw ConfigError(c.params.key_path("horizons") + ": empty");
  for (double& T : horizons) T = step_aligned(e, T, c.params.key_path("horizons"));
  const std::size_t r_points = mode == "cesaro" ? c.params.count("r_points", 10) : 0;
  if (mode == "cesaro" && r_points == 0) throw ConfigError(c.params.key_path("r_points") + ": must be positive");
  const auto sp = sampler_params(c, "mu", 100);
  c.params.finish();

  const auto mu = draw_samples(c, sp);
  const double t_max = *std::max_element(horizons.begin(), horizons.end());
  Outcome o;
  o.owned_noise = e.make_noise(c.cfg.seed, -std::max(t_max, e.dt()), 0.0);
  o.noise = &*o.owned_noise;
  o.table.columns = {"t_pullback", "diameter", "n_cloud"};
  for (double T : horizons) {
    EquilibriumCloud cloud;
    if (mode == "pushforward") {
      cloud = equilibrium_pushforward(e, *o.noise, mu, T, c.cfg.par);
    } else {
      if (!(T > 0.0)) throw ConfigError(c.params.key_path("horizons") + ": Cesaro horizons must be positive");
      std::vector<double> grid;
      for (std::size_t k = 1; k <= r_points; ++k) {
        const double r = std::round(T * static_cast<double>(k) / static_cast<double>(r_points) / e.dt()) * e.dt();
        if (r > 0.0 && (grid.empty() || r > grid.back())) grid.push_back(r);
      }
      cloud = equilibrium_cesaro(e, *o.noise, mu, grid, nullptr, c.cfg.par);
    }
    o.table.add({T, cloud.diameter, cloud.states.size()});
  }
  o.extra["mode"] = mode;
  o.extra["mu_diameter"] = cloud_diameter(e, mu, c.cfg.par);
  o.plot_x = "t_pullback";
  o.plot_y = "diameter";
  return o;
}

Outcome run_interval_check(Context& c) {
  const Engine& e = *c.engine;
  const OrderRelation order = order_param(c);
  if (order.kind == OrderKind::dual_preceq && e.kind() != EngineKind::spme) {
    throw ConfigError(c.params.key_path("order") + ": the dual order applies to the spme engine only");
  }
  const double alpha = c.params.number("alpha", 0.05);
  const auto sp = sampler_params(c, "samples", 1000);
  c.params.finish();

  std::vector<GridFunction> xs;
  for (auto& s : draw_samples(c, sp)) xs.emplace_back(e.state_grid(), std::move(s));
  const auto r = interval_concentration(xs, order, alpha);
  Outcome o;
  o.table.columns = {"alpha", "coverage", "n_fit", "n_eval"};
  o.table.add({alpha, r.coverage, r.n_fit, r.n_eval});
  o.extra["order"] = to_string(order.kind);
  o.extra["lower"] = state_json(r.interval.lower().values());
  o.extra["upper"] = state_json(r.interval.upper().values());
  return o;
}

Outcome run_normality_probe(Context& c) {
  const auto ns = c.params.numbers("ns", std::vector<double>{1, 8, 32, 64});
  const double step = c.params.number("quad_step", 1e-4);
  c.params.finish();
  Outcome o;
  o.table.columns = {"n", "seminorm", "ratio"};
  bool bracketed = true;
  for (double nd : ns) {
    if (nd != std::floor(nd) || nd < 1) throw ConfigError(c.params.key_path("ns") + ": expected positive integers");
    const auto p = normality_probe(static_cast<int>(nd), step);
    bracketed = bracketed && p.bracketed;
    o.table.add({p.n, p.seminorm, p.ratio});
  }
  o.extra["bracketed"] = bracketed;
  o.plot_x = "n";
  o.plot_y = "ratio";
  return o;
}

Outcome run_order_check(Context& c) {
  const Engine& e = *c.engine;
  const OrderRelation order = order_param(c);
  const std::size_t trials = c.params.count("trials", 1000);
  const double horizon = step_aligned(e, c.params.number("t_horizon", 1.0), c.params.key_path("t_horizon"));
  const bool identical = c.params.boolean("identical_pairs", false);
  c.params.finish();
  const auto rep = order_preservation_test(e, order, trials, horizon, c.cfg.seed, identical, c.cfg.par);
  Outcome o;
  o.table.columns = {"order", "trials", "violations", "worst_violation"};
  o.table.add({to_string(order.kind), rep.trials, rep.violations, rep.worst_violation});
  return o;
}

Outcome run_mixing_check(Context& c) {
  const Engine& e = *c.engine;
  const std::string mode = c.params.string("mode", "two_start");
  if (mode != "two_start" && mode != "pullback_forward") {
    throw ConfigError(c.params.key_path("mode") + ": expected two_start or pullback_forward");
  }
  const State x = state_param(c, "x", e.default_state());
  const State y = mode == "two_start" ? state_param(c, "y", std::nullopt) : x;
  const double t = step_aligned(e, c.params.number("t", 10.0), c.params.key_path("t"));
  const std::size_t n = c.params.count("n", 1000);
  if (n == 0) throw ConfigError(c.params.key_path("n") + ": must be positive");
  c.params.finish();

  std::vector<State> a, b;
  if (mode == "two_start") {
    a = forward_samples(e, x, t, n, c.cfg.seed, c.cfg.par);
    b = forward_samples(e, y, t, n, stream_seed(c.cfg.seed, kSecondStream), c.cfg.par);
  } else {
    a = forward_samples(e, x, t, n, c.cfg.seed, c.cfg.par);
    b = pullback_samples(e, x, t, n, stream_seed(c.cfg.seed, kSecondStream), c.cfg.par);
  }
  const bool scalar = e.state_dim() == 1;
  const double stat = law_distance(a, b, scalar ? LawMetric::ks_scalar : LawMetric::energy_grid, e.state_grid());
  Outcome o;
  o.table.columns = {"t", "mode", "metric", "statistic", "critical_value", "n_a", "n_b"};
  o.table.add({t, mode, scalar ? "ks" : "energy", stat, scalar ? Json(ks_critical_5pct(n, n)) : Json(), n, n});
  return o;
}

using Runner = Outcome (*)(Context&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"simulate", run_simulate},
      {"pullback", run_pullback},
      {"sync-curve", run_sync_curve},
      {"equilibrium", run_equilibrium},
      {"interval-check", run_interval_check},
      {"normality-probe", run_normality_probe},
      {"order-check", run_order_check},
      {"mixing-check", run_mixing_check},
  };
  return r;
}

int execute(const RunRequest& req, std::ostream& out) {
  std::vector<std::string> overrides = req.overrides;
  if (req.subcommand != "run") overrides.insert(overrides.begin(), "diagnostic.kind=" + req.subcommand);
  ExperimentConfig cfg = load_config(req.config, overrides);
  if (req.threads) cfg.par.threads = *req.threads;
  if (req.out_dir) cfg.output.dir = *req.out_dir;
  if (cfg.diagnostic.empty()) throw ConfigError("missing key diagnostic.kind");

  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& p) { return p.first == cfg.diagnostic; });
  if (it == reg.end()) throw ConfigError("diagnostic.kind: unknown diagnostic '" + cfg.diagnostic + "'");

  EnginePtr engine;
  if (cfg.has_engine) {
    try {
      engine = make_engine(cfg.engine);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("engine: ") + e.what());
    }
  }
  Section params(cfg.resolved["diagnostic"], "diagnostic");
  params.string("kind");
  Context ctx{cfg, engine, params};
  Outcome o = it->second(ctx);

  std::filesystem::create_directories(cfg.output.dir);
  Json artifacts = Json::array();
  const std::string stem = cfg.diagnostic;
  if (cfg.output.csv) artifacts.push_back(write_artifact(cfg.output.dir, stem + ".csv", to_csv(o.table)));
  if (cfg.output.json) {
    Json report{{"tool", "syncrds"},
                {"version", kToolVersion},
                {"diagnostic", cfg.diagnostic},
                {"engine", engine ? Json(to_string(engine->kind())) : Json()},
                {"seed", cfg.seed},
                {"columns", o.table.columns},
                {"rows", rows_as_json(o.table)},
                {"extra", o.extra}};
    artifacts.push_back(write_artifact(cfg.output.dir, "report.json", dump_json(report)));
  }
  if (cfg.output.plot && !o.plot_x.empty()) {
    const auto svg = to_svg(o.table, o.plot_x, o.plot_y, cfg.diagnostic);
    if (!svg.empty()) artifacts.push_back(write_artifact(cfg.output.dir, stem + ".svg", svg));
  }
  if (cfg.output.noise_dump && o.noise) {
    std::ostringstream bin(std::ios::binary);
    write_path_binary(*o.noise, bin);
    artifacts.push_back(write_artifact(cfg.output.dir, "noise.bin", bin.str()));
  }
  Json manifest{{"tool", "syncrds"},
                {"version", kToolVersion},
                {"diagnostic", cfg.diagnostic},
                {"seed", cfg.seed},
                {"config", cfg.resolved},
                {"artifacts", artifacts}};
  write_artifact(cfg.output.dir, "manifest.json", dump_json(manifest));
  out << "wrote " << artifacts.size() + 1 << " artifacts to " << cfg.output.dir.string() << "\n";
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& diagnostic_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

int run_experiment(const RunRequest& request, std::ostream& out, std::ostream& err) {
  try {
    return execute(request, out);
  } catch (const ConfigError& e) {
    err << "syncrds: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "syncrds: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    err << "syncrds: invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "syncrds: invalid state: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "syncrds: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace syncrds::cli

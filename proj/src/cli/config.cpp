#include "syncrds/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "syncrds/error.hpp"
#include "syncrds/grid.hpp"

namespace syncrds::cli {

namespace {

Json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

Json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
  }
  return nullptr;
}

Json parse_yaml(const std::string& text, const std::string& where) {
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string type_name(const Json& v) { return v.type_name(); }

QSpec parse_qspec(Section& s, std::size_t n, double length) {
  if (!s.has("q")) s.value("q") = "harmonic";
  Json& q = s.value("q");
  if (q.is_string()) {
    if (q.get<std::string>() != "harmonic") {
      throw ConfigError(s.key_path("q") + ": expected a list of amplitudes or \"harmonic\"");
    }
    return QSpec::harmonic(s.count("n_modes", n), length);
  }
  if (!q.is_array()) throw ConfigError(s.key_path("q") + ": expected a list of amplitudes");
  QSpec spec;
  spec.domain_length = length;
  for (const auto& v : q) {
    if (!v.is_number()) throw ConfigError(s.key_path("q") + ": amplitudes must be numbers");
    spec.q.push_back(v.get<double>());
  }
  return spec;
}

EngineSpec parse_engine(Section s, double dt, const std::filesystem::path& base_dir) {
  const std::string kind_name = s.string("kind");
  EngineKind kind;
  try {
    kind = engine_kind_from_string(kind_name);
  } catch (const InvalidArgument&) {
    throw ConfigError(s.key_path("kind") + ": unknown engine kind '" + kind_name +
                      "' (expected ou, fbm_sde, reflected, torus, spme or two_wall)");
  }
  EngineSpec spec;
  spec.dt = dt;
  switch (kind) {
    case EngineKind::ou: {
      OuConfig c;
      c.rate = s.number("rate", 1.0);
      c.sigma = s.number("sigma", 1.0);
      spec.config = c;
      break;
    }
    case EngineKind::fbm_sde: {
      FbmConfig c;
      c.hurst = s.number("hurst");
      if (!s.has("drift")) s.value("drift") = Json{{"kind", "linear"}, {"lambda", 1.0}};
      c.drift = parse_drift(s.value("drift"), s.key_path("drift"));
      c.ode_substeps = s.count("ode_substeps", 1);
      spec.config = c;
      break;
    }
    case EngineKind::reflected: {
      ReflectedConfig c;
      c.lower = s.number("lower", -1.0);
      c.upper = s.number("upper", 1.0);
      if (!s.has("drift")) s.value("drift") = Json{{"kind", "linear"}, {"lambda", 1.0}};
      c.drift = parse_drift(s.value("drift"), s.key_path("drift"));
      spec.config = c;
      break;
    }
    case EngineKind::torus: spec.config = TorusConfig{}; break;
    case EngineKind::spme: {
      SpmeConfig c;
      const std::size_t n = s.count("n", 32);
      c.grid = {s.number("length", 1.0), n};
      c.m = s.number("m", 2.0);
      c.qspec = parse_qspec(s, n, c.grid.length);
      c.newton_tol = s.number("newton_tol", 1e-12);
      c.newton_max_iter = s.count("newton_max_iter", 50);
      c.jac_reg = s.number("jac_reg", 1e-12);
      c.sigma_exponent = s.number("sigma_exponent", 2.0);
      spec.config = c;
      break;
    }
    case EngineKind::two_wall: {
      TwoWallConfig c;
      c.n = s.count("n", 32);
      c.length = s.number("length", 1.0);
      if (!s.has("h1")) s.value("h1") = -1.0;
      if (!s.has("h2")) s.value("h2") = 1.0;
      c.h1 = parse_state(s.value("h1"), c.n, c.length, base_dir, s.key_path("h1"));
      c.h2 = parse_state(s.value("h2"), c.n, c.length, base_dir, s.key_path("h2"));
      if (!s.has("drift")) s.value("drift") = Json{{"kind", "linear"}, {"lambda", 0.0}};
      c.drift = parse_drift(s.value("drift"), s.key_path("drift"));
      c.sigma = s.number("sigma", 1.0);
      spec.config = c;
      break;
    }
  }
  s.finish();
  return spec;
}

}  // namespace

// ---------------------------------------------------------------- Section

Section::Section(Json& node, std::string path) : node_(node), path_(std::move(path)) {
  if (node_.is_null()) node_ = Json::object();
  if (!node_.is_object()) throw ConfigError(path_ + ": expected a section of key/value pairs");
}

std::string Section::key_path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool Section::has(const std::string& key) const {
  return node_.contains(key) && !node_.at(key).is_null();
}

Json& Section::value(const std::string& key) {
  if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) seen_.push_back(key);
  if (!node_.contains(key)) {
    // Callers that set defaults write through this reference.
    node_[key] = nullptr;
  }
  return node_[key];
}

double Section::number(const std::string& key, std::optional<double> def) {
  Json& v = value(key);
  if (v.is_null()) {
    if (!def) throw ConfigError("missing key " + key_path(key));
    v = *def;
    return *def;
  }
  if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number, got " + type_name(v));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key_path(key) + ": not finite");
  return d;
}

std::int64_t Section::integer(const std::string& key, std::optional<std::int64_t> def) {
  Json& v = value(key);
  if (v.is_null()) {
    if (!def) throw ConfigError("missing key " + key_path(key));
    v = *def;
    return *def;
  }
  if (!v.is_number_integer()) {
    throw ConfigError(key_path(key) + ": expected an integer, got " + type_name(v));
  }
  return v.get<std::int64_t>();
}

std::size_t Section::count(const std::string& key, std::optional<std::size_t> def) {
  const std::optional<std::int64_t> d =
      def ? std::optional<std::int64_t>(static_cast<std::int64_t>(*def)) : std::nullopt;
  const std::int64_t v = integer(key, d);
  if (v < 0) throw ConfigError(key_path(key) + ": must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool Section::boolean(const std::string& key, std::optional<bool> def) {
  Json& v = value(key);
  if (v.is_null()) {
    if (!def) throw ConfigError("missing key " + key_path(key));
    v = *def;
    return *def;
  }
  if (!v.is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
  return v.get<bool>();
}

std::string Section::string(const std::string& key, std::optional<std::string> def) {
  Json& v = value(key);
  if (v.is_null()) {
    if (!def) throw ConfigError("missing key " + key_path(key));
    v = *def;
    return *def;
  }
  if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string, got " + type_name(v));
  return v.get<std::string>();
}

std::vector<double> Section::numbers(const std::string& key,
                                     std::optional<std::vector<double>> def) {
  Json& v = value(key);
  if (v.is_null()) {
    if (!def) throw ConfigError("missing key " + key_path(key));
    v = *def;
    return *def;
  }
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(key_path(key) + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(key_path(key) + ": expected a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Section Section::child(const std::string& key) { return Section(value(key), key_path(key)); }

void Section::finish() const {
  for (const auto& [key, v] : node_.items()) {
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
      throw ConfigError("unknown key " + key_path(key));
    }
  }
}

// ---------------------------------------------------------------- values

State parse_state(const Json& value, std::size_t dim, double length,
                  const std::filesystem::path& base_dir, const std::string& where) {
  if (value.is_number()) return State(dim, value.get<double>());
  if (value.is_array()) {
    State out;
    for (const auto& v : value) {
      if (!v.is_number()) throw ConfigError(where + ": state entries must be numbers");
      out.push_back(v.get<double>());
    }
    if (out.size() != dim) {
      throw ConfigError(where + ": expected " + std::to_string(dim) + " values, got " +
                        std::to_string(out.size()));
    }
    return out;
  }
  if (value.is_object() && value.contains("file") && value.size() == 1 &&
      value.at("file").is_string()) {
    const auto file = base_dir / value.at("file").get<std::string>();
    std::ifstream in(file);
    if (!in) throw ConfigError(where + ": cannot read " + file.string());
    try {
      auto u = read_text(in, length);
      if (u.size() != dim) {
        throw ConfigError(where + ": " + file.string() + " holds " + std::to_string(u.size()) +
                          " values, expected " + std::to_string(dim));
      }
      return u.values();
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + ": expected a number, a list, or {file: path}");
}

Drift parse_drift(Json& node, const std::string& where) {
  if (node.is_string()) {
    const auto name = node.get<std::string>();
    if (name == "double_well") return Drift::double_well();
    if (name == "zero") return Drift::linear(0.0);
    throw ConfigError(where + ": unknown drift '" + name + "'");
  }
  Section s(node, where);
  const std::string kind = s.string("kind");
  Drift d = Drift::linear(0.0);
  if (kind == "linear") {
    d = Drift::linear(s.number("lambda"));
  } else if (kind == "double_well") {
    d = Drift::double_well();
  } else if (kind == "table") {
    try {
      d = Drift::table(s.numbers("x"), s.numbers("b"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else {
    throw ConfigError(s.key_path("kind") + ": unknown drift kind '" + kind +
                      "' (expected linear, double_well or table)");
  }
  s.finish();
  return d;
}

void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const Json value = parse_yaml(assignment.substr(eq + 1), "override " + key);
  Json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (node->is_null()) *node = Json::object();
    if (!node->is_object()) throw ConfigError("override " + key + ": parent is not a section");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.resolved = parse_yaml(yaml_text, "config");
  if (cfg.resolved.is_null()) cfg.resolved = Json::object();
  if (!cfg.resolved.is_object()) throw ConfigError("config: top level must be a mapping");
  for (const auto& o : overrides) apply_override(cfg.resolved, o);

  for (const auto& [k, v] : cfg.resolved.items()) {
    if (k != "engine" && k != "noise" && k != "diagnostic" && k != "output" && k != "threads") {
      throw ConfigError("unknown key " + k);
    }
  }
  Section root(cfg.resolved, "");
  {
    Section d = root.child("diagnostic");
    cfg.diagnostic = d.has("kind") ? d.string("kind") : "";
  }
  // The probe is a pure quadrature; it needs no engine.
  cfg.has_engine = cfg.diagnostic != "normality-probe" || cfg.resolved.contains("engine");
  if (cfg.has_engine && !cfg.resolved.contains("engine")) {
    throw ConfigError("missing key engine.kind");
  }

  Section noise = root.child("noise");
  const std::int64_t seed = noise.integer("seed", 1);
  if (seed < 0) throw ConfigError("noise.seed: must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const double dt = noise.number("dt", cfg.has_engine ? std::nullopt : std::optional<double>(1e-3));
  if (!(dt > 0.0)) throw ConfigError("noise.dt: must be positive");
  if (noise.has("window")) {
    const auto w = noise.numbers("window");
    if (w.size() != 2 || !(w[0] < w[1])) {
      throw ConfigError("noise.window: expected [t0, t1] with t0 < t1");
    }
  }
  noise.finish();

  if (cfg.has_engine) {
    try {
      cfg.engine = parse_engine(root.child("engine"), dt, base_dir);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("engine: ") + e.what());
    }
  }

  Section out = root.child("output");
  cfg.output.dir = base_dir / out.string("dir", "out");
  const auto formats = out.value("formats").is_null() ? Json::array({"csv", "json"}) : out.value("formats");
  out.value("formats") = formats;
  if (!formats.is_array()) throw ConfigError("output.formats: expected a list");
  cfg.output.csv = cfg.output.json = false;
  for (const auto& f : formats) {
    if (f == "csv") {
      cfg.output.csv = true;
    } else if (f == "json") {
      cfg.output.json = true;
    } else {
      throw ConfigError("output.formats: unknown format " + f.dump());
    }
  }
  cfg.output.plot = out.boolean("plot", false);
  cfg.output.noise_dump = out.boolean("noise_dump", false);
  out.finish();

  if (root.has("threads")) {
    const std::int64_t t = root.integer("threads");
    if (t < 0) throw ConfigError("threads: must be nonnegative");
    cfg.par.threads = static_cast<unsigned>(t);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_config(text.str(), base, overrides);
}

}  // namespace syncrds::cli

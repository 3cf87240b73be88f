#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "syncrds/engines.hpp"
#include "syncrds/parallel.hpp"

namespace syncrds::cli {

using Json = nlohmann::json;

/// One config section. Reads record defaults back into the node, so the
/// resolved config is complete; finish() rejects keys nobody read.
class Section {
 public:
  Section(Json& node, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key, std::optional<double> def = std::nullopt);
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt);
  std::size_t count(const std::string& key, std::optional<std::size_t> def = std::nullopt);
  bool boolean(const std::string& key, std::optional<bool> def = std::nullopt);
  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt);
  std::vector<double> numbers(const std::string& key,
                              std::optional<std::vector<double>> def = std::nullopt);
  /// Raw value; required.
  Json& value(const std::string& key);
  Section child(const std::string& key);

  void finish() const;
  const std::string& path() const { return path_; }
  std::string key_path(const std::string& key) const;

 private:
  Json& node_;
  std::string path_;
  std::vector<std::string> seen_;
};

struct OutputSettings {
  std::filesystem::path dir;
  bool csv = true;
  bool json = true;
  bool plot = false;
  bool noise_dump = false;
};

struct ExperimentConfig {
  Json resolved;
  std::filesystem::path base_dir;
  bool has_engine = true;
  EngineSpec engine;
  std::uint64_t seed = 0;
  std::string diagnostic;
  OutputSettings output;
  Parallelism par;
};

/// Reads the YAML file, applies `key.path=value` overrides (values parsed as
/// YAML) and resolves the engine, noise, output and threads blocks. The
/// diagnostic block is resolved by the runner.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides);

/// Same, from YAML text with paths taken relative to base_dir.
ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides);

void apply_override(Json& root, const std::string& assignment);

/// A state given as a scalar (broadcast), a list, or {file: path} in the
/// GridFunction text form.
State parse_state(const Json& value, std::size_t dim, double length,
                  const std::filesystem::path& base_dir, const std::string& where);

Drift parse_drift(Json& node, const std::string& where);

}  // namespace syncrds::cli

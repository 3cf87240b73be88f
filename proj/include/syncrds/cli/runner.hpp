#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace syncrds::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
};

/// Diagnostic names accepted as subcommands and as diagnostic.kind.
const std::vector<std::string>& diagnostic_names();

struct RunRequest {
  std::filesystem::path config;
  std::string subcommand = "run";  // "run" uses diagnostic.kind from the file
  std::vector<std::string> overrides;
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> out_dir;
};

/// Runs one experiment and writes its artifacts. Never throws; errors are
/// reported as one line on `err` and mapped to an exit code.
int run_experiment(const RunRequest& request, std::ostream& out, std::ostream& err);

}  // namespace syncrds::cli

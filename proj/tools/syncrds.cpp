// syncrds: experiment runner for the order-preserving random dynamical systems.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "syncrds/cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace syncrds::cli;

  CLI::App app{"syncrds: simulate order-preserving random dynamical systems and measure synchronization"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<unsigned> threads;
    std::string out;
  };
  Args args;
  std::string chosen;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", args.config, "YAML experiment config")->required();
    sub->add_option("--set", args.overrides, "Override a config value, e.g. --set noise.seed=7")
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--threads", args.threads, "Worker threads (default: config, then SYNCRDS_THREADS)");
    sub->add_option("--out", args.out, "Output directory (default: output.dir of the config)");
    sub->callback([&chosen, name] { chosen = name; });
  };
  add("run", "Run the diagnostic named by diagnostic.kind");
  for (const auto& name : diagnostic_names()) add(name, "Run the " + name + " diagnostic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  RunRequest req;
  req.config = args.config;
  req.subcommand = chosen;
  req.overrides = args.overrides;
  req.threads = args.threads;
  if (!args.out.empty()) req.out_dir = args.out;
  return run_experiment(req, std::cout, std::cerr);
}

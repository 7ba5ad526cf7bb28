// Scenario runner: `finsler run <config.json> [--out DIR] [--seed N] [--list-scenarios]`.
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "finsler/errors.hpp"
#include "finsler/scenario.hpp"

#ifndef FINSLER_SCENARIO_DIR
#define FINSLER_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;

namespace {

fs::path scenario_dir() {
  if (const char* env = std::getenv("FINSLER_SCENARIO_DIR")) return env;
  return FINSLER_SCENARIO_DIR;
}

// A path, or the name of a bundled scenario with or without ".json".
fs::path resolve(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  fs::path p = scenario_dir() / arg;
  if (fs::exists(p)) return p;
  p += ".json";
  if (fs::exists(p)) return p;
  return arg;
}

void apply_thread_env() {
  if (const char* env = std::getenv("FINSLER_NUM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
  }
}

int list(std::ostream& os) {
  for (const fs::path& p : finsler::list_scenarios(scenario_dir())) {
    std::string desc;
    try {
      const auto j = finsler::load_scenario(p);
      desc = j.value("description", "");
    } catch (const std::exception&) {
      desc = "(unreadable)";
    }
    os << p.stem().string() << "  " << desc << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical Finsler geometry: scenario runner"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run a scenario file and write its report");
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool list_only = false;
  bool serial = false;
  run->add_option("config", config, "Scenario JSON file or bundled scenario name");
  run->add_option("--out", out, "Output directory for the report and CSV files");
  run->add_option("--seed", seed, "Override the seed in the config");
  run->add_flag("--list-scenarios", list_only, "List the bundled scenarios and exit");
  run->add_flag("--serial", serial, "Use the single-threaded reference kernels");
  CLI11_PARSE(app, argc, argv);

  apply_thread_env();
  if (list_only) return list(std::cout);
  if (config.empty()) {
    std::cerr << "error: run needs a scenario file (or --list-scenarios)\n";
    return 1;
  }
  try {
    const fs::path path = resolve(config);
    const auto cfg = finsler::load_scenario(path);
    finsler::RunOptions ro;
    ro.seed = seed;
    ro.parallel = !serial;
    const finsler::ScenarioResult r = finsler::run_scenario(cfg, ro);
    finsler::write_scenario_outputs(r, out);
    std::cout << r.name << " [" << r.verifier << ", seed " << r.seed << "]\n";
    for (const finsler::Verdict& v : r.verdicts) {
      std::cout << "  " << (v.passed ? "PASS" : (v.hypothesis ? "UNCERTIFIED" : "FAIL")) << "  " << v.name
                << "  value=" << v.value << "  tol=" << v.tolerance << '\n';
    }
    std::cout << "status: " << finsler::to_string(r.status) << '\n';
    return static_cast<int>(r.status);
  } catch (const finsler::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

// dcl: command-line front end for the dispersive curve flow laboratory.
//
//   dcl simulate --manifest run.json
//   dcl verify   --suite identities --grids 64,128
//   dcl converge --manifest run.json --mode dt --levels 4

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "dispflow/lab.hpp"

using namespace dispflow;

namespace {

int simulate(const std::string& path) {
  RunManifest m;
  try {
    m = load_manifest(path);
    (void)initial_curve(m);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const SimulateResult r = run_simulation(m);
  if (r.failure) {
    std::cerr << "solver failure (" << r.failure->kind << ") at t=" << r.failure->t << ": " << r.failure->message
              << "\n";
  }
  std::cout << "wrote " << r.rows.size() << " rows to " << (std::filesystem::path(m.output_dir) / "report.csv").string()
            << "\n";
  return r.exit_code;
}

int converge(const std::string& path, const std::string& mode_name, int levels) {
  RunManifest m;
  ConvergeMode mode;
  try {
    m = load_manifest(path);
    mode = converge_mode_from_string(mode_name);
    if (levels < 3) throw ConfigError("--levels must be >= 3");
    (void)initial_curve(m);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  bool failed = false;
  const std::string csv = run_converge(m, mode, levels, failed);
  write_atomic(std::filesystem::path(m.output_dir) / ("converge_" + mode_name + ".csv"), csv);
  std::cout << csv;
  return failed ? kExitSolver : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersive curve flow laboratory"};
  app.require_subcommand(1);

  std::string manifest;
  auto* sim = app.add_subcommand("simulate", "run a manifest and write report.csv");
  sim->add_option("--manifest", manifest, "run manifest (JSON)")->required();

  std::string suite;
  std::vector<int> grids{64, 128};
  auto* ver = app.add_subcommand("verify", "run a named property suite");
  ver->add_option("--suite", suite, "identities | projections | oracles | maxprinciple | smoothing")->required();
  ver->add_option("--grids", grids, "grid sizes")->delimiter(',');

  std::string mode;
  int levels = 3;
  auto* con = app.add_subcommand("converge", "epsilon, grid or dt refinement study");
  con->add_option("--manifest", manifest, "run manifest (JSON)")->required();
  con->add_option("--mode", mode, "epsilon | grid | dt")->required();
  con->add_option("--levels", levels, "number of refinement levels (>= 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return simulate(manifest);
    if (*ver) return run_verify(suite, grids, std::cout);
    if (*con) return converge(manifest, mode, levels);
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}

#ifndef SUPERCRIT_RUN_HPP
#define SUPERCRIT_RUN_HPP

#include "supercrit/experiments.hpp"
#include "supercrit/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace supercrit {

/// Process exit codes shared by the CLI and the run layer.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitUsage = 2, kExitSoftFailure = 3 };

enum class Protocol { Simulate, Scatter, Stability, Blowup, Morawetz };

std::string to_string(Protocol p);

struct Assertion {
  std::string name;
  bool passed = false;
  double value = 0;
  double threshold = 0;
};

struct RunManifest {
  Protocol protocol = Protocol::Simulate;
  Scenario scenario;
  std::string version;
  double wall_seconds = 0;
  bool boundary_touched = false;
  bool overflow_halt = false;
  /// Message of a module error that stopped the run, if any.
  std::optional<std::string> error;
  std::vector<Assertion> assertions;
  std::filesystem::path dir;
  /// Files written by the run, relative to dir; manifest.json comes last.
  std::vector<std::string> files;
  std::uint64_t series_checksum = 0;

  int exit_code() const;
  bool assertions_passed() const;
  nlohmann::json to_json() const;
};

std::string code_version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// Value of SUPERCRIT_OUT, or "out" when unset.
std::filesystem::path default_out_root();

nlohmann::json scenario_json(const Scenario& s);

/// Time step of the scenario: explicit dt, else the CFL step of the basis.
double scenario_dt(const Scenario& s, const Basis& basis);

/// Runs the protocol and writes <out_root>/<name>/{series.csv, report.json,
/// manifest.json}. Module errors are caught and recorded in the manifest.
RunManifest run_scenario(const Scenario& s, const std::filesystem::path& out_root,
                         Protocol protocol = Protocol::Simulate);

/// Same, reusing an already built basis (must match the scenario grid).
RunManifest run_scenario(const Scenario& s, const Basis& basis, const std::filesystem::path& out_root,
                         Protocol protocol = Protocol::Simulate);

}  // namespace supercrit

#endif  // SUPERCRIT_RUN_HPP

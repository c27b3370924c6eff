#pragma once

#include "yamabe/gamma_solver.hpp"
#include "yamabe/reduced_functional.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace yamabe::cli {

enum class Command { Integrals, Bubble, Gamma, Pohozaev, Landscape, Classify, VerifyAll };
Command parse_command(const std::string& s);
std::string to_string(Command c);

struct RunConfig {
  std::optional<int> n;                       // falls back to the geometry's n, then 7
  std::optional<std::filesystem::path> geometry;
  std::optional<std::filesystem::path> config;  // pohozaev problem description
  std::optional<std::filesystem::path> profile; // gamma profile artifact
  GridSpec grid;
  std::vector<double> delta_sweep;
  std::vector<double> epsilon_bar{1.0};
  std::filesystem::path out = "yamabe-out";
  std::uint64_t seed = 20240601;
  OmegaConvention omega = OmegaConvention::Printed;
  bool csv = false;
  bool check = false;

  int dimension() const;
  // Throws std::domain_error for n < 7 and std::invalid_argument otherwise.
  void validate() const;
};

// Reads a run configuration file; keys mirror the command line flags
// ("n", "geometry", "grid", "delta_sweep", "epsilon_bar", "out", "seed",
// "omega_convention", "profile", "csv").  Relative paths resolve against
// the file's directory.
RunConfig load_run_config(const std::filesystem::path& file);

// SHA-256 over the canonical JSON of the configuration, including the
// contents of any referenced input files.
std::string config_hash(Command c, const RunConfig& cfg);

// Exit status: 0 success, 1 invariant violated, 2 error (reported on err).
int run(Command c, const RunConfig& cfg, std::ostream& out, std::ostream& err);

std::filesystem::path default_profile_path(const RunConfig& cfg);

}  // namespace yamabe::cli

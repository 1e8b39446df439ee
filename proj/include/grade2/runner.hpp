#pragma once

// Orchestration of the subcommands and their on-disk artifacts.

#include "grade2/config.hpp"
#include "grade2/experiments.hpp"
#include "grade2/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace grade2 {

inline constexpr const char* kToolVersion = "1.0.0";

/// Grid, system and initial state resolved from a configuration.
struct Setup {
  std::unique_ptr<DiskGrid> grid;
  GalerkinSystem system;
  Eigen::VectorXd c0;
  int trial_dimension = 0;
};

/// Builds (or loads from basis.cache_dir) a basis with max(n_modes, basis.n_modes) modes.
Setup build_setup(const RunConfig& cfg, int n_modes = -1);

struct RunFlags {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  bool quiet = false;
};

/// Applies the command-line overrides to the configuration.
RunConfig apply_flags(RunConfig cfg, const RunFlags& flags);

/// Runs one of basis | simulate | ensemble | stability | converge | verify and
/// writes manifest.json, timing.json and the experiment outputs into the
/// output directory.  Returns the process exit status.
int run(const std::string& subcommand, const RunConfig& cfg, const RunFlags& flags, std::ostream& log);

/// "%.16e", the CSV float format.
std::string format_double(double v);

}  // namespace grade2

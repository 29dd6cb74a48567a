#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "config.hpp"

namespace svx::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNotConverged = 3, kCacheError = 4 };

struct SolveOptions {
  std::filesystem::path config;
  std::vector<double> freq_hz;
  std::optional<double> rre;
  std::optional<int> restart;
  std::optional<double> tucker_tol;
  std::optional<SchurKind> schur;
  std::optional<double> schur_tol;
  bool no_tucker = false;
  std::optional<std::filesystem::path> cache;
  /// Output prefix; writes PREFIX.csv, .stats.json, .timings.json, .vtk.
  std::filesystem::path out;
};

struct CacheBuildOptions {
  Index nmax = 128;
  double tol = 1e-8;
  std::filesystem::path out;
};

int cmd_cache_build(const CacheBuildOptions& opts, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svx::cli

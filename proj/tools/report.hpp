#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "svx/opfft.hpp"
#include "svx/solve.hpp"

namespace svx::cli {

/// Rounds to 12 significant digits so reports are stable across runs.
[[nodiscard]] double round12(double v);
[[nodiscard]] std::string fmt12(double v);

struct Timings {
  double toeplitz_s = 0.0;
  double circulant_s = 0.0;
  double total_s = 0.0;
};

void write_csv(std::ostream& out, const ProjectConfig& cfg, const std::vector<PortSpec>& ports,
               const SolveReport& rep);

[[nodiscard]] nlohmann::json stats_json(const ProjectConfig& cfg, const VoxelGrid& grid,
                                        const CirculantKernels& kernels, const SolveReport& rep);

[[nodiscard]] nlohmann::json timings_json(const Timings& t, const SolveReport& rep);

/// Legacy VTK STRUCTURED_POINTS with per-cell |J| and Re(J).
void write_vtk(std::ostream& out, const VoxelGrid& grid, const SolveReport& rep);

}  // namespace svx::cli

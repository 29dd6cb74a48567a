#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svx/precond.hpp"
#include "svx/voxgrid.hpp"

namespace svx::cli {

/// Malformed or inconsistent configuration; the message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PortConfig {
  std::string name;
  FaceSelector plus;
  FaceSelector minus;
  double length_m = 0.0;
};

struct ProjectConfig {
  GeometrySpec geometry;
  std::vector<PortConfig> ports;
  std::vector<double> frequencies_hz{1e9};
  double rre = 1e-8;
  int restart = 50;
  int max_iters = 3000;
  double tucker_tol = 1e-8;
  bool compress_circulants = true;
  SchurKind schur = SchurKind::AmgCg;
  double schur_tol = 1e-8;
  std::optional<std::filesystem::path> cache;
  /// Reference inductance per port name, for the err column.
  std::vector<std::pair<std::string, double>> reference_inductance;
  std::filesystem::path base_dir;
};

/// Parses a project config. "geometry" is either an inline object or a path
/// (relative to the config file) to a geometry JSON.
[[nodiscard]] ProjectConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] ProjectConfig load_config(const std::filesystem::path& path);

/// Geometry JSON: dx_m, domain, materials, boxes, ports.
void parse_geometry(const nlohmann::json& j, ProjectConfig& cfg);

/// Resolves face selectors to terminal node sets.
[[nodiscard]] std::vector<PortSpec> resolve_ports(const ProjectConfig& cfg, const VoxelGrid& grid,
                                                  const NodeIndex& nodes);

}  // namespace svx::cli

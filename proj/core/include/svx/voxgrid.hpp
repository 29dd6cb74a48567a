#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "svx/types.hpp"

namespace svx {

/// Marks a normal (non-superconducting) conductor: London depth taken as infinite.
inline constexpr double kNormalConductor = std::numeric_limits<double>::infinity();

/// Two-fluid material parameters.
struct Material {
  std::string name;
  double sigma0 = 0.0;  ///< normal-channel conductivity, S/m
  double lambda = kNormalConductor;  ///< London penetration depth, m

  [[nodiscard]] bool is_normal() const noexcept { return lambda == kNormalConductor; }
};

/// Axis-aligned box of voxels, inclusive bounds.
struct Box {
  std::array<Index, 3> lo{};
  std::array<Index, 3> hi{};
  std::size_t material = 0;
};

struct GeometrySpec {
  Dims domain;
  double dx = 0.0;
  std::vector<Material> materials;
  std::vector<Box> boxes;
};

/// Occupancy lattice plus per-voxel material. Non-empty voxels are enumerated
/// with x fastest; that enumeration defines the column order of every
/// current block.
class VoxelGrid {
 public:
  /// Rasterizes the boxes. Throws GeometryError on empty result, conflicting
  /// overlaps, out-of-domain boxes or invalid materials.
  static VoxelGrid build(const GeometrySpec& spec);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] double dx() const noexcept { return dx_; }
  /// K: number of non-empty voxels.
  [[nodiscard]] Index voxel_count() const noexcept { return static_cast<Index>(voxels_.size()); }
  /// Kt: number of lattice cells.
  [[nodiscard]] Index cell_count() const noexcept { return dims_.total(); }

  [[nodiscard]] bool in_domain(Index i, Index j, Index k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_.x && j < dims_.y && k < dims_.z;
  }
  /// Voxel id at a lattice cell, or -1 when empty / outside.
  [[nodiscard]] Index voxel_at(Index i, Index j, Index k) const noexcept {
    return in_domain(i, j, k) ? cell_voxel_[static_cast<std::size_t>(i + dims_.x * (j + dims_.y * k))]
                              : -1;
  }
  [[nodiscard]] bool occupied(Index i, Index j, Index k) const noexcept { return voxel_at(i, j, k) >= 0; }

  [[nodiscard]] const std::array<Index, 3>& position(Index voxel) const { return voxels_[voxel]; }
  [[nodiscard]] std::span<const std::array<Index, 3>> positions() const noexcept { return voxels_; }
  [[nodiscard]] const Material& material_of(Index voxel) const {
    return materials_[voxel_material_[voxel]];
  }
  [[nodiscard]] std::size_t material_index(Index voxel) const { return voxel_material_[voxel]; }
  [[nodiscard]] const std::vector<Material>& materials() const noexcept { return materials_; }

 private:
  Dims dims_{};
  double dx_ = 0.0;
  std::vector<Material> materials_;
  std::vector<Index> cell_voxel_;
  std::vector<std::array<Index, 3>> voxels_;
  std::vector<std::size_t> voxel_material_;
};

/// Faces of a voxel in node order.
enum class Face : std::uint8_t { XMinus = 0, XPlus, YMinus, YPlus, ZMinus, ZPlus };

[[nodiscard]] constexpr Face face_of(int axis, int sign) noexcept {
  return static_cast<Face>(2 * axis + (sign > 0 ? 1 : 0));
}

/// Canonical node numbering: one node per distinct voxel face. Ids follow the
/// sorted order of a lattice face key, so they do not depend on how voxels
/// were enumerated.
class NodeIndex {
 public:
  explicit NodeIndex(const VoxelGrid& grid);

  /// M: number of unique nodes.
  [[nodiscard]] Index node_count() const noexcept { return static_cast<Index>(multiplicity_.size()); }
  [[nodiscard]] Index node(Index voxel, Face f) const { return voxel_nodes_[voxel][static_cast<int>(f)]; }
  [[nodiscard]] const std::array<Index, 6>& nodes_of(Index voxel) const { return voxel_nodes_[voxel]; }
  /// True for faces owned by exactly one non-empty voxel.
  [[nodiscard]] bool is_boundary(Index node) const { return multiplicity_[node] == 1; }
  /// Lattice key of a node; stable across voxel orderings.
  [[nodiscard]] std::uint64_t key(Index node) const { return keys_[node]; }

 private:
  std::vector<std::array<Index, 6>> voxel_nodes_;
  std::vector<std::uint8_t> multiplicity_;
  std::vector<std::uint64_t> keys_;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Signed outward face fluxes of every current basis (M rows, 5K columns).
/// Column b*K + v belongs to basis b of voxel v.
struct IncidenceMatrix {
  Index nodes = 0;
  Index voxels = 0;
  SparseMatrix matrix;
};

[[nodiscard]] IncidenceMatrix build_incidence(const VoxelGrid& grid, const NodeIndex& nodes);

[[nodiscard]] inline Index node_count(const NodeIndex& nodes) { return nodes.node_count(); }
/// N = 5K + M.
[[nodiscard]] inline Index unknown_count(const VoxelGrid& grid, const NodeIndex& nodes) {
  return kNumBases * grid.voxel_count() + nodes.node_count();
}

/// Outward flux of a basis through one face of its voxel, per unit face area.
[[nodiscard]] double face_flux(Basis basis, Face face) noexcept;

/// Selects the boundary faces on side (axis, sign) of the non-empty voxels
/// inside an inclusive voxel box.
struct FaceSelector {
  int axis = 0;
  int sign = -1;
  std::array<Index, 3> lo{};
  std::array<Index, 3> hi{};
};

struct PortSpec {
  std::string name;
  std::vector<Index> plus;
  std::vector<Index> minus;
  double length_m = 0.0;  ///< optional, for per-unit-length reporting
};

[[nodiscard]] std::vector<Index> select_terminal(const VoxelGrid& grid, const NodeIndex& nodes,
                                                 const FaceSelector& sel);

/// Throws GeometryError unless terminals are non-empty, disjoint and on the boundary.
void validate_port(const PortSpec& port, const NodeIndex& nodes);

/// Incidence with terminal nodes removed. Terminal potentials are known, so
/// their rows move to the right-hand side and their conservation equations
/// are dropped.
struct ReducedIncidence {
  SparseMatrix free;      ///< rows of free nodes
  SparseMatrix terminal;  ///< rows of eliminated nodes
  std::vector<Index> free_nodes;
  std::vector<Index> terminal_nodes;
  std::vector<Index> node_to_row;  ///< free row, or -1 - terminal row
};

[[nodiscard]] ReducedIncidence eliminate_nodes(const IncidenceMatrix& inc,
                                               std::span<const Index> terminal_nodes);

}  // namespace svx

#include "svx/voxgrid.hpp"

#include <algorithm>
#include <cmath>

namespace svx {

namespace {

void check_material(const Material& m) {
  if (!(m.sigma0 >= 0.0) || !std::isfinite(m.sigma0))
    throw GeometryError("material '" + m.name + "': sigma0 must be finite and >= 0");
  if (!(m.lambda > 0.0))
    throw GeometryError("material '" + m.name + "': lambda must be > 0");
  if (m.is_normal() && m.sigma0 == 0.0)
    throw GeometryError("material '" + m.name + "': normal conductor needs sigma0 > 0");
}

}  // namespace

VoxelGrid VoxelGrid::build(const GeometrySpec& spec) {
  if (spec.domain.x <= 0 || spec.domain.y <= 0 || spec.domain.z <= 0)
    throw GeometryError("domain dimensions must be positive, got " + to_string(spec.domain));
  if (!(spec.dx > 0.0) || !std::isfinite(spec.dx))
    throw GeometryError("dx must be positive");
  for (const auto& m : spec.materials) check_material(m);

  VoxelGrid g;
  g.dims_ = spec.domain;
  g.dx_ = spec.dx;
  g.materials_ = spec.materials;

  constexpr std::size_t kEmpty = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cell_material(static_cast<std::size_t>(spec.domain.total()), kEmpty);

  for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
    const Box& box = spec.boxes[b];
    if (box.material >= spec.materials.size())
      throw GeometryError("box " + std::to_string(b) + " references unknown material");
    for (int a = 0; a < 3; ++a) {
      if (box.lo[a] < 0 || box.hi[a] >= spec.domain[a] || box.lo[a] > box.hi[a])
        throw GeometryError("box " + std::to_string(b) + " lies outside the domain " +
                            to_string(spec.domain));
    }
    for (Index k = box.lo[2]; k <= box.hi[2]; ++k)
      for (Index j = box.lo[1]; j <= box.hi[1]; ++j)
        for (Index i = box.lo[0]; i <= box.hi[0]; ++i) {
          auto& cell = cell_material[static_cast<std::size_t>(i + spec.domain.x * (j + spec.domain.y * k))];
          if (cell != kEmpty && cell != box.material)
            throw GeometryError("box " + std::to_string(b) + " overlaps a box of material '" +
                                spec.materials[cell].name + "' with a different material");
          cell = box.material;
        }
  }

  g.cell_voxel_.assign(cell_material.size(), -1);
  for (Index k = 0; k < g.dims_.z; ++k)
    for (Index j = 0; j < g.dims_.y; ++j)
      for (Index i = 0; i < g.dims_.x; ++i) {
        const auto c = static_cast<std::size_t>(i + g.dims_.x * (j + g.dims_.y * k));
        if (cell_material[c] == kEmpty) continue;
        g.cell_voxel_[c] = static_cast<Index>(g.voxels_.size());
        g.voxels_.push_back({i, j, k});
        g.voxel_material_.push_back(cell_material[c]);
      }
  if (g.voxels_.empty()) throw GeometryError("geometry has no non-empty voxels");
  return g;
}

NodeIndex::NodeIndex(const VoxelGrid& grid) {
  const Dims d = grid.dims();
  const auto ex = static_cast<std::uint64_t>(d.x + 1);
  const auto ey = static_cast<std::uint64_t>(d.y + 1);
  // Face (axis, sign) of cell (i,j,k) is the minus face of the next cell
  // along that axis, so keying by the minus-side cell collapses shared faces.
  auto face_key = [&](const std::array<Index, 3>& p, int axis, int sign) {
    std::array<Index, 3> q = p;
    if (sign > 0) ++q[axis];
    const auto lin = static_cast<std::uint64_t>(q[0]) +
                     ex * (static_cast<std::uint64_t>(q[1]) + ey * static_cast<std::uint64_t>(q[2]));
    return 3 * lin + static_cast<std::uint64_t>(axis);
  };

  const Index K = grid.voxel_count();
  std::vector<std::uint64_t> all;
  all.reserve(static_cast<std::size_t>(6 * K));
  for (Index v = 0; v < K; ++v)
    for (int f = 0; f < 6; ++f) all.push_back(face_key(grid.position(v), f / 2, (f % 2) ? 1 : -1));

  keys_ = all;
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  multiplicity_.assign(keys_.size(), 0);

  voxel_nodes_.resize(static_cast<std::size_t>(K));
  for (Index v = 0; v < K; ++v)
    for (int f = 0; f < 6; ++f) {
      const auto key = all[static_cast<std::size_t>(6 * v + f)];
      const auto id = static_cast<Index>(std::lower_bound(keys_.begin(), keys_.end(), key) - keys_.begin());
      voxel_nodes_[v][f] = id;
      ++multiplicity_[id];
    }
}

std::vector<Index> select_terminal(const VoxelGrid& grid, const NodeIndex& nodes, const FaceSelector& sel) {
  if (sel.axis < 0 || sel.axis > 2 || (sel.sign != 1 && sel.sign != -1))
    throw GeometryError("face selector needs axis in {x,y,z} and sign in {+,-}");
  std::vector<Index> out;
  const Dims d = grid.dims();
  for (Index k = std::max<Index>(sel.lo[2], 0); k <= std::min(sel.hi[2], d.z - 1); ++k)
    for (Index j = std::max<Index>(sel.lo[1], 0); j <= std::min(sel.hi[1], d.y - 1); ++j)
      for (Index i = std::max<Index>(sel.lo[0], 0); i <= std::min(sel.hi[0], d.x - 1); ++i) {
        const Index v = grid.voxel_at(i, j, k);
        if (v < 0) continue;
        const Index n = nodes.node(v, face_of(sel.axis, sel.sign));
        if (nodes.is_boundary(n)) out.push_back(n);
      }
  std::sort(out.begin(), out.end());
  return out;
}

void validate_port(const PortSpec& port, const NodeIndex& nodes) {
  if (port.plus.empty() || port.minus.empty())
    throw GeometryError("port '" + port.name + "' has an empty terminal");
  for (const auto* set : {&port.plus, &port.minus})
    for (Index n : *set) {
      if (n < 0 || n >= nodes.node_count())
        throw GeometryError("port '" + port.name + "' references an unknown node");
      if (!nodes.is_boundary(n))
        throw GeometryError("port '" + port.name + "' uses an interior face");
    }
  std::vector<Index> a = port.plus, b = port.minus;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<Index> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) throw GeometryError("port '" + port.name + "' terminals overlap");
}

}  // namespace svx

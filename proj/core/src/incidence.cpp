#include <algorithm>
#include <vector>

#include "svx/voxgrid.hpp"

namespace svx {

double face_flux(Basis basis, Face face) noexcept {
  const int f = static_cast<int>(face);
  const int axis = f / 2;
  const double sign = (f % 2) ? 1.0 : -1.0;
  switch (basis) {
    case Basis::X:
    case Basis::Y:
    case Basis::Z:
      return axis == index_of(basis) ? sign : 0.0;
    case Basis::TwoD:
      // ((x - xk) x^ - (y - yk) y^) / dx leaves through both x faces and
      // enters through both y faces.
      return axis == 0 ? 0.5 : (axis == 1 ? -0.5 : 0.0);
    case Basis::ThreeD:
      return axis == 2 ? -1.0 : 0.5;
  }
  return 0.0;
}

IncidenceMatrix build_incidence(const VoxelGrid& grid, const NodeIndex& nodes) {
  const Index K = grid.voxel_count();
  const Index M = nodes.node_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(K) * (2 + 2 + 2 + 4 + 6));
  for (Index v = 0; v < K; ++v) {
    const auto& nv = nodes.nodes_of(v);
    for (Basis b : kAllBases) {
      const Index col = index_of(b) * K + v;
      for (int f = 0; f < 6; ++f) {
        const double w = face_flux(b, static_cast<Face>(f));
        if (w != 0.0) trip.emplace_back(static_cast<int>(nv[f]), static_cast<int>(col), w);
      }
    }
  }
  IncidenceMatrix inc;
  inc.nodes = M;
  inc.voxels = K;
  inc.matrix.resize(static_cast<int>(M), static_cast<int>(kNumBases * K));
  inc.matrix.setFromTriplets(trip.begin(), trip.end());
  inc.matrix.makeCompressed();
  return inc;
}

ReducedIncidence eliminate_nodes(const IncidenceMatrix& inc, std::span<const Index> terminal_nodes) {
  ReducedIncidence out;
  out.terminal_nodes.assign(terminal_nodes.begin(), terminal_nodes.end());
  std::sort(out.terminal_nodes.begin(), out.terminal_nodes.end());
  out.terminal_nodes.erase(std::unique(out.terminal_nodes.begin(), out.terminal_nodes.end()),
                           out.terminal_nodes.end());

  out.node_to_row.assign(static_cast<std::size_t>(inc.nodes), 0);
  for (std::size_t t = 0; t < out.terminal_nodes.size(); ++t) {
    const Index n = out.terminal_nodes[t];
    if (n < 0 || n >= inc.nodes) throw GeometryError("terminal node out of range");
    out.node_to_row[n] = -1 - static_cast<Index>(t);
  }
  for (Index n = 0; n < inc.nodes; ++n) {
    if (out.node_to_row[n] < 0) continue;
    out.node_to_row[n] = static_cast<Index>(out.free_nodes.size());
    out.free_nodes.push_back(n);
  }

  std::vector<Eigen::Triplet<double>> tf, tt;
  const auto& A = inc.matrix;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
      const Index r = out.node_to_row[it.row()];
      if (r >= 0)
        tf.emplace_back(static_cast<int>(r), c, it.value());
      else
        tt.emplace_back(static_cast<int>(-1 - r), c, it.value());
    }
  out.free.resize(static_cast<int>(out.free_nodes.size()), A.cols());
  out.free.setFromTriplets(tf.begin(), tf.end());
  out.terminal.resize(static_cast<int>(out.terminal_nodes.size()), A.cols());
  out.terminal.setFromTriplets(tt.begin(), tt.end());
  return out;
}

}  // namespace svx

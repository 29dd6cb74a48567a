#pragma once

#include <random>
#include <vector>

#include "svx/opfft.hpp"
#include "svx/solve.hpp"

namespace svx::test {

inline Material copper() { return {"cu", 5.8e7, kNormalConductor}; }
inline Material niobium(double lambda = 9e-8) { return {"nb", 0.0, lambda}; }

inline GeometrySpec single_box(Dims domain, double dx, Material m) {
  GeometrySpec g;
  g.domain = domain;
  g.dx = dx;
  g.materials = {std::move(m)};
  g.boxes = {{{0, 0, 0}, {domain.x - 1, domain.y - 1, domain.z - 1}, 0}};
  return g;
}

/// Random occupancy of a small lattice as unit boxes; at least one voxel.
inline GeometrySpec random_geometry(Dims domain, double dx, double fill, std::mt19937_64& rng) {
  GeometrySpec g;
  g.domain = domain;
  g.dx = dx;
  g.materials = {copper(), niobium()};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index k = 0; k < domain.z; ++k)
    for (Index j = 0; j < domain.y; ++j)
      for (Index i = 0; i < domain.x; ++i)
        if (u(rng) < fill) g.boxes.push_back({{i, j, k}, {i, j, k}, u(rng) < 0.5 ? 0u : 1u});
  if (g.boxes.empty()) g.boxes.push_back({{0, 0, 0}, {0, 0, 0}, 0});
  return g;
}

/// Port on the two x end faces of a bar filling the whole domain.
inline PortSpec end_to_end_port(const VoxelGrid& grid, const NodeIndex& nodes, const std::string& name = "p") {
  const Dims d = grid.dims();
  return {name, select_terminal(grid, nodes, {0, -1, {0, 0, 0}, {0, d.y - 1, d.z - 1}}),
          select_terminal(grid, nodes, {0, 1, {d.x - 1, 0, 0}, {d.x - 1, d.y - 1, d.z - 1}})};
}

/// Strip over a ground plane, shorted at the far end, driven at x = 0.
/// Strip and ground are `width` voxels wide and `t` thick, separated by `d`.
struct Microstrip {
  GeometrySpec spec;
  FaceSelector plus, minus;
};

inline Microstrip microstrip(Index length, Index width, Index t, Index d, double dx, double lambda) {
  Microstrip m;
  m.spec.domain = {length + 1, width, 2 * t + d};
  m.spec.dx = dx;
  m.spec.materials = {niobium(lambda)};
  m.spec.boxes = {{{0, 0, 0}, {length, width - 1, t - 1}, 0},
                  {{0, 0, t + d}, {length, width - 1, 2 * t + d - 1}, 0},
                  {{length, 0, t}, {length, width - 1, t + d - 1}, 0}};
  m.plus = {0, -1, {0, 0, t + d}, {0, width - 1, 2 * t + d - 1}};
  m.minus = {0, -1, {0, 0, 0}, {0, width - 1, t - 1}};
  return m;
}

/// L-shaped bend of square cross-section n voxels: arm 1 along x, arm 2 along y.
inline Microstrip bend(Index n, double dx, double lambda) {
  Microstrip m;
  m.spec.domain = {5 * n, 5 * n, n};
  m.spec.dx = dx;
  m.spec.materials = {niobium(lambda)};
  m.spec.boxes = {{{0, 0, 0}, {5 * n - 1, n - 1, n - 1}, 0}, {{4 * n, n, 0}, {5 * n - 1, 5 * n - 1, n - 1}, 0}};
  m.plus = {0, -1, {0, 0, 0}, {0, n - 1, n - 1}};
  m.minus = {1, 1, {4 * n, 5 * n - 1, 0}, {5 * n - 1, 5 * n - 1, n - 1}};
  return m;
}

/// Parallel-plate kinetic plus magnetic inductance per unit length.
inline double parallel_plate_inductance(double d, double t1, double t2, double lambda, double w) {
  return kMu0 * (d + lambda / std::tanh(t1 / lambda) + lambda / std::tanh(t2 / lambda)) / w;
}

inline std::vector<cplx> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {nd(rng), nd(rng)};
  return v;
}

inline double relative_error(std::span<const cplx> a, std::span<const cplx> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

/// FFT of the circulant embedding of one stored block, without building the
/// other blocks.
inline Array3<cplx> circulant_spectrum(const ToeplitzKernelSet& set, BlockId id) {
  const Dims g = set.dims();
  const Dims p{2 * g.x, 2 * g.y, 2 * g.z};
  Fft3 fft(p);
  auto wrap = [](Index i, Index k) { return i < k ? i : i - 2 * k; };
  Array3<cplx> out(p);
  for (Index k = 0; k < p.z; ++k)
    for (Index j = 0; j < p.y; ++j)
      for (Index i = 0; i < p.x; ++i) {
        const bool gap = i == g.x || j == g.y || k == g.z;
        fft.buffer()[out.linear(i, j, k)] = gap ? 0.0 : set.value(id, wrap(i, g.x), wrap(j, g.y), wrap(k, g.z));
      }
  fft.forward();
  std::copy_n(fft.buffer(), p.total(), out.data());
  return out;
}

/// Runs one extraction and returns the report.
inline SolveReport extract(const GeometrySpec& spec, const FaceSelector& plus, const FaceSelector& minus,
                           SolveConfig cfg, CirculantOptions copts = {}) {
  const VoxelGrid grid = VoxelGrid::build(spec);
  const NodeIndex nodes(grid);
  const Extraction ex(grid, {{"p", select_terminal(grid, nodes, plus), select_terminal(grid, nodes, minus)}});
  const CirculantKernels kernels(assemble_toeplitz(grid.dims(), grid.dx()), copts);
  return run_extraction(ex, kernels, cfg);
}

}  // namespace svx::test

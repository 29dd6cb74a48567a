#include "svx/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "svx/quadrature.hpp"

namespace svx {

namespace {

constexpr std::array<BlockInfo, kNumBlocks> kBlocks = {{
    {BlockId::XX, Basis::X, Basis::X, {false, false, false}, {'x', 'x'}},
    {BlockId::YY, Basis::Y, Basis::Y, {false, false, false}, {'y', 'y'}},
    {BlockId::ZZ, Basis::Z, Basis::Z, {false, false, false}, {'z', 'z'}},
    {BlockId::X2D, Basis::X, Basis::TwoD, {true, false, false}, {'x', 'a'}},
    {BlockId::X3D, Basis::X, Basis::ThreeD, {true, false, false}, {'x', 'b'}},
    {BlockId::Y2D, Basis::Y, Basis::TwoD, {false, true, false}, {'y', 'a'}},
    {BlockId::Y3D, Basis::Y, Basis::ThreeD, {false, true, false}, {'y', 'b'}},
    {BlockId::Z3D, Basis::Z, Basis::ThreeD, {false, false, true}, {'z', 'b'}},
    {BlockId::D2D2, Basis::TwoD, Basis::TwoD, {false, false, false}, {'a', 'a'}},
    {BlockId::D2D3, Basis::TwoD, Basis::ThreeD, {false, false, false}, {'a', 'b'}},
    {BlockId::D3D3, Basis::ThreeD, Basis::ThreeD, {false, false, false}, {'b', 'b'}},
}};

constexpr double kInvFourPi = 0.25 / std::numbers::pi;

/// 1-D overlap weights of two unit intervals separated by t = s - s':
/// w00 = int 1, w01 = int s', w11 = int s s' over {s - s' = t}.
struct AxisWeights {
  double w00;
  double w01;
  double w11;
};

inline AxisWeights axis_weights(double t) noexcept {
  const double a = std::abs(t);
  const double base = 1.0 - a;
  return {base, -0.5 * t * base, (a - 1.0) * (2.0 * t * t + 2.0 * a - 1.0) / 12.0};
}

struct Accum {
  double g0 = 0.0;
  std::array<double, 3> s{};
  std::array<double, 3> p{};

  inline void add(double g, const AxisWeights& wx, const AxisWeights& wy, const AxisWeights& wz) noexcept {
    const double yz = wy.w00 * wz.w00;
    const double xz = wx.w00 * wz.w00;
    const double xy = wx.w00 * wy.w00;
    g0 += g * wx.w00 * yz;
    s[0] += g * wx.w01 * yz;
    s[1] += g * wy.w01 * xz;
    s[2] += g * wz.w01 * xy;
    p[0] += g * wx.w11 * yz;
    p[1] += g * wy.w11 * xz;
    p[2] += g * wz.w11 * xy;
  }
};

int regular_order(Index rinf) noexcept {
  if (rinf <= 2) return 12;
  if (rinf <= 4) return 8;
  if (rinf <= 8) return 6;
  if (rinf <= 64) return 5;
  return 4;
}

/// Unit sub-cell [lo, lo+1]^3 of the separation domain, no singularity.
void integrate_regular(const Offset& d, const std::array<double, 3>& lo, double dx, int order, Accum& acc) {
  const GaussRule rule = gauss_legendre(order);
  const auto n = rule.nodes.size();
  std::array<std::vector<double>, 3> pos;
  std::array<std::vector<AxisWeights>, 3> w;
  for (int a = 0; a < 3; ++a) {
    pos[a].resize(n);
    w[a].resize(n);
    for (std::size_t q = 0; q < n; ++q) {
      const double t = lo[a] + rule.nodes[q];
      pos[a][q] = dx * (static_cast<double>(d[a]) + t);
      AxisWeights aw = axis_weights(t);
      aw.w00 *= rule.weights[q];
      aw.w01 *= rule.weights[q];
      aw.w11 *= rule.weights[q];
      w[a][q] = aw;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double zz = pos[2][k] * pos[2][k];
    for (std::size_t j = 0; j < n; ++j) {
      const double yz = pos[1][j] * pos[1][j] + zz;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = std::sqrt(pos[0][i] * pos[0][i] + yz);
        acc.add(kInvFourPi / r, w[0][i], w[1][j], w[2][k]);
      }
    }
  }
}

/// Sub-cell with the singular point at its corner `c`; `dir` points into the cell.
/// Splitting into three pyramids and collapsing each apex (Duffy) cancels the 1/r.
void integrate_duffy(const std::array<double, 3>& c, const std::array<double, 3>& dir, double dx,
                     int order, Accum& acc) {
  const GaussRule radial = gauss_legendre(8);
  const GaussRule ang = gauss_legendre(order);
  for (int apex = 0; apex < 3; ++apex) {
    const int ia = (apex + 1) % 3;
    const int ib = (apex + 2) % 3;
    for (std::size_t qa = 0; qa < ang.nodes.size(); ++qa) {
      for (std::size_t qb = 0; qb < ang.nodes.size(); ++qb) {
        const double a = ang.nodes[qa];
        const double b = ang.nodes[qb];
        const double rho = std::sqrt(1.0 + a * a + b * b);
        const double wab = ang.weights[qa] * ang.weights[qb];
        for (std::size_t qt = 0; qt < radial.nodes.size(); ++qt) {
          const double tau = radial.nodes[qt];
          std::array<double, 3> v{};
          v[apex] = tau;
          v[ia] = tau * a;
          v[ib] = tau * b;
          std::array<AxisWeights, 3> aw{};
          for (int k = 0; k < 3; ++k) aw[k] = axis_weights(c[k] + dir[k] * v[k]);
          // tau^2 (Jacobian) * 1/(4 pi dx tau rho)
          const double g = kInvFourPi * tau / (dx * rho) * wab * radial.weights[qt];
          acc.add(g, aw[0], aw[1], aw[2]);
        }
      }
    }
  }
}

}  // namespace

const std::array<BlockInfo, kNumBlocks>& all_blocks() { return kBlocks; }

const BlockInfo& block_info(BlockId id) { return kBlocks[static_cast<int>(id)]; }

std::optional<BlockRef> find_block(Basis test, Basis source) noexcept {
  for (const auto& b : kBlocks) {
    if (b.test == test && b.source == source) return BlockRef{b.id, false};
    if (b.test == source && b.source == test) return BlockRef{b.id, true};
  }
  return std::nullopt;
}

double GreenMoments::block(BlockId id) const noexcept {
  switch (id) {
    case BlockId::XX:
    case BlockId::YY:
    case BlockId::ZZ: return g0;
    case BlockId::X2D:
    case BlockId::X3D: return s[0];
    case BlockId::Y2D: return -s[1];
    case BlockId::Y3D: return s[1];
    case BlockId::Z3D: return -2.0 * s[2];
    case BlockId::D2D2: return p[0] + p[1];
    case BlockId::D2D3: return p[0] - p[1];
    case BlockId::D3D3: return p[0] + p[1] + 4.0 * p[2];
  }
  return 0.0;
}

GreenMoments green_moments(const Offset& offset, double dx, int order) {
  const Index rinf = std::max({std::abs(offset[0]), std::abs(offset[1]), std::abs(offset[2])});
  const int reg = order > 0 ? order : regular_order(rinf);
  const int duffy = order > 0 ? order : 12;

  Accum acc;
  for (int cell = 0; cell < 8; ++cell) {
    std::array<double, 3> lo{};
    bool corner = true;
    std::array<double, 3> c{}, dir{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = (cell >> a) & 1 ? 0.0 : -1.0;
      // separation vanishes at t = -offset
      const double sing = -static_cast<double>(offset[a]);
      if (sing == lo[a]) {
        c[a] = lo[a];
        dir[a] = 1.0;
      } else if (sing == lo[a] + 1.0) {
        c[a] = lo[a] + 1.0;
        dir[a] = -1.0;
      } else {
        corner = false;
      }
    }
    if (corner)
      integrate_duffy(c, dir, dx, duffy, acc);
    else
      integrate_regular(offset, lo, dx, reg, acc);
  }

  // Each of the two volume integrals contributes dx^3.
  const double vol2 = dx * dx * dx * dx * dx * dx;
  GreenMoments m;
  m.g0 = acc.g0 * vol2;
  for (int a = 0; a < 3; ++a) {
    m.s[a] = acc.s[a] * vol2;
    m.p[a] = acc.p[a] * vol2;
  }
  return m;
}

namespace {

constexpr double kNearTol = 1e-8;

GreenMoments checked_moments(const Offset& offset, double dx) {
  GreenMoments m = green_moments(offset, dx);
  const Index rinf = std::max({std::abs(offset[0]), std::abs(offset[1]), std::abs(offset[2])});
  if (rinf > 2) return m;
  const GreenMoments ref = green_moments(offset, dx, 20);
  // Coincident self term sets the scale for every near entry.
  static const double unit_self = green_moments({0, 0, 0}, 1.0, 20).g0;
  const double scale = unit_self * std::pow(dx, 5);
  double err = std::abs(m.g0 - ref.g0);
  for (int a = 0; a < 3; ++a) err = std::max({err, std::abs(m.s[a] - ref.s[a]), std::abs(m.p[a] - ref.p[a])});
  if (err > kNearTol * scale)
    throw QuadratureError("Galerkin quadrature did not converge at offset (" + std::to_string(offset[0]) +
                              "," + std::to_string(offset[1]) + "," + std::to_string(offset[2]) + ")",
                          err / scale);
  return m;
}

// Odd in a zero coordinate means the entry vanishes identically.
bool vanishes_by_parity(BlockId id, const Offset& o) {
  const auto& info = block_info(id);
  for (int a = 0; a < 3; ++a)
    if (info.odd[a] && o[a] == 0) return true;
  return false;
}

}  // namespace

double galerkin_integral(BlockId id, const Offset& offset, double dx) {
  if (vanishes_by_parity(id, offset)) return 0.0;
  return checked_moments(offset, dx).block(id);
}

ToeplitzKernelSet::ToeplitzKernelSet(Dims dims, double dx) : dims_(dims), dx_(dx) {
  for (auto& b : blocks_) b = Array3<double>(dims);
}

double ToeplitzKernelSet::value(BlockId id, Index m, Index n, Index p) const {
  const auto& info = block_info(id);
  double sign = 1.0;
  const std::array<Index, 3> o{m, n, p};
  for (int a = 0; a < 3; ++a)
    if (o[a] < 0 && info.odd[a]) sign = -sign;
  return sign * blocks_[static_cast<int>(id)](std::abs(m), std::abs(n), std::abs(p));
}

double ToeplitzKernelSet::value(Basis test, Basis source, Index m, Index n, Index p) const {
  const auto ref = find_block(test, source);
  if (!ref) return 0.0;
  // Reciprocity: T^{a,b}(d) = T^{b,a}(-d).
  return ref->transposed ? value(ref->id, -m, -n, -p) : value(ref->id, m, n, p);
}

void ToeplitzKernelSet::scale(double factor, double new_dx) {
  for (auto& b : blocks_) b *= factor;
  dx_ = new_dx;
}

ToeplitzKernelSet assemble_toeplitz(Dims dims, double dx) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw std::invalid_argument("assemble_toeplitz: empty dims");
  if (!(dx > 0.0)) throw std::invalid_argument("assemble_toeplitz: dx must be positive");
  ToeplitzKernelSet set(dims, dx);
  for (Index k = 0; k < dims.z; ++k)
    for (Index j = 0; j < dims.y; ++j)
      for (Index i = 0; i < dims.x; ++i) {
        const GreenMoments m = std::max({i, j, k}) <= 2 ? checked_moments({i, j, k}, dx)
                                                        : green_moments({i, j, k}, dx);
        for (const auto& b : kBlocks)
          set.block(b.id)(i, j, k) = vanishes_by_parity(b.id, {i, j, k}) ? 0.0 : m.block(b.id);
      }
  return set;
}

TwoFluidCoeffs two_fluid_coeffs(const Material& m, double omega, double mu) {
  if (!std::isfinite(omega) || !(omega > 0.0)) throw std::invalid_argument("two_fluid_coeffs: omega must be > 0");
  if (!std::isfinite(mu) || !(mu > 0.0)) throw std::invalid_argument("two_fluid_coeffs: mu must be > 0");
  if (!std::isfinite(m.sigma0) || !(m.sigma0 >= 0.0))
    throw std::invalid_argument("two_fluid_coeffs: sigma0 must be finite and >= 0");
  if (m.is_normal()) {
    if (m.sigma0 == 0.0) throw std::invalid_argument("two_fluid_coeffs: normal conductor with sigma0 = 0");
    return {1.0 / m.sigma0, 0.0};
  }
  if (!std::isfinite(m.lambda) || !(m.lambda > 0.0))
    throw std::invalid_argument("two_fluid_coeffs: lambda must be finite and > 0");
  const double l2 = m.lambda * m.lambda;
  const double wl = omega * mu * l2;
  const double q = m.sigma0 * wl;
  const double den = 1.0 + q * q;
  return {m.sigma0 * wl * wl / den, l2 / den};
}

DiagonalTerms diagonal_terms(const VoxelGrid& grid, double omega, double mu) {
  DiagonalTerms out;
  const Index K = grid.voxel_count();
  std::vector<cplx> per_material;
  per_material.reserve(grid.materials().size());
  for (const auto& m : grid.materials()) per_material.push_back(two_fluid_coeffs(m, omega, mu).c(omega, mu));
  for (Basis b : kAllBases) {
    auto& z = out.z[index_of(b)];
    z.resize(static_cast<std::size_t>(K));
    const double f = conduction_factor(b) / grid.dx();
    for (Index v = 0; v < K; ++v) z[v] = per_material[grid.material_index(v)] * f;
  }
  return out;
}

}  // namespace svx

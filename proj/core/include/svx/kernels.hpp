#pragma once

#include <array>
#include <optional>
#include <vector>

#include "svx/array3.hpp"
#include "svx/types.hpp"
#include "svx/voxgrid.hpp"

namespace svx {

/// Stored (upper-triangular) non-zero blocks of the impedance matrix. The
/// lower blocks are transposes; (x,y), (x,z), (y,z), (z,2D) vanish.
enum class BlockId : std::uint8_t { XX = 0, YY, ZZ, X2D, X3D, Y2D, Y3D, Z3D, D2D2, D2D3, D3D3 };
inline constexpr int kNumBlocks = 11;

struct BlockInfo {
  BlockId id;
  Basis test;
  Basis source;
  /// Axes along which the kernel is odd in the offset.
  std::array<bool, 3> odd;
  /// Two-byte tag used in the cache file.
  std::array<char, 2> tag;
};

[[nodiscard]] const BlockInfo& block_info(BlockId id);
[[nodiscard]] const std::array<BlockInfo, kNumBlocks>& all_blocks();

/// Locates the stored block for a (test, source) pair. `transposed` is true
/// when the pair is the transpose of the stored block. Empty for structural zeros.
struct BlockRef {
  BlockId id;
  bool transposed;
};
[[nodiscard]] std::optional<BlockRef> find_block(Basis test, Basis source) noexcept;

/// Two-fluid coefficients a (ohm m) and b (m^2); c = a + j w mu b equals 1/sigma.
struct TwoFluidCoeffs {
  double a = 0.0;
  double b = 0.0;
  [[nodiscard]] cplx c(double omega, double mu = kMu0) const noexcept { return {a, omega * mu * b}; }
};

[[nodiscard]] TwoFluidCoeffs two_fluid_coeffs(const Material& m, double omega, double mu = kMu0);

/// Elementary Galerkin integrals of G = 1/(4 pi |r - r'|) between a test
/// cube and a source cube displaced by `offset` voxels (test minus source).
/// Linear weights use local coordinates divided by the voxel edge:
///   g0  = int int G
///   s_a = int int (a' - a_k)/dx G              (source-linear along axis a)
///   p_a = int int (a - a_l)(a' - a_k)/dx^2 G   (both linear along axis a)
/// All scale as dx^5.
struct GreenMoments {
  double g0 = 0.0;
  std::array<double, 3> s{};
  std::array<double, 3> p{};

  /// Kernel value of a stored block assembled from the moments.
  [[nodiscard]] double block(BlockId id) const noexcept;
};

/// Evaluates the moments by reducing the 6-D integral to a 3-D integral over
/// the separation vector with piecewise-polynomial weights, split into unit
/// sub-cells. Sub-cells touching the singularity use a Duffy transform.
/// `order` overrides the distance-based Gauss order schedule (0 = schedule).
[[nodiscard]] GreenMoments green_moments(const Offset& offset, double dx = 1.0, int order = 0);

/// Single Galerkin integral for a stored block at a signed offset. Near
/// offsets are checked against a higher-order evaluation; disagreement beyond
/// 1e-8 (relative to the coincident self term) raises QuadratureError.
[[nodiscard]] double galerkin_integral(BlockId id, const Offset& offset, double dx = 1.0);

/// Toeplitz kernels for every stored block on the non-negative offset octant.
class ToeplitzKernelSet {
 public:
  ToeplitzKernelSet() = default;
  ToeplitzKernelSet(Dims dims, double dx);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] double dx() const noexcept { return dx_; }

  [[nodiscard]] Array3<double>& block(BlockId id) { return blocks_[static_cast<int>(id)]; }
  [[nodiscard]] const Array3<double>& block(BlockId id) const { return blocks_[static_cast<int>(id)]; }

  /// Stored block at a signed offset, recovered through per-axis parity.
  [[nodiscard]] double value(BlockId id, Index m, Index n, Index p) const;
  /// Any (test, source) pair; zero for structurally empty pairs.
  [[nodiscard]] double value(Basis test, Basis source, Index m, Index n, Index p) const;

  /// Scales every block (used to apply dx^5 after restoring unit kernels).
  void scale(double factor, double new_dx);

 private:
  Dims dims_{};
  double dx_ = 1.0;
  std::array<Array3<double>, kNumBlocks> blocks_;
};

/// Direct assembly of all kernels at voxel edge dx.
[[nodiscard]] ToeplitzKernelSet assemble_toeplitz(Dims dims, double dx = 1.0);

/// Per-voxel conduction terms: z^b = c/dx times {1, 1, 1, 1/6, 1/2}.
struct DiagonalTerms {
  std::array<std::vector<cplx>, kNumBases> z;
};

[[nodiscard]] DiagonalTerms diagonal_terms(const VoxelGrid& grid, double omega, double mu = kMu0);

/// Basis self-overlap int f.f dV in units of dx^3 after current normalization.
[[nodiscard]] constexpr double conduction_factor(Basis b) noexcept {
  switch (b) {
    case Basis::TwoD: return 1.0 / 6.0;
    case Basis::ThreeD: return 0.5;
    default: return 1.0;
  }
}

}  // namespace svx

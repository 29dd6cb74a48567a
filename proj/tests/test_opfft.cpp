#include <chrono>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

namespace svx {
namespace {

constexpr double kOmega = 2.0 * std::numbers::pi * 1e9;

std::vector<cplx> dense_apply(const DenseMatrix<cplx>& Z, std::span<const cplx> x) {
  const Eigen::VectorXcd y = Z * Eigen::Map<const Eigen::VectorXcd>(x.data(), static_cast<Index>(x.size()));
  return {y.data(), y.data() + y.size()};
}

TEST(OpFft, MatchesDenseOnRandomGeometries) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 5; ++t) {
    const Dims d = t % 2 ? Dims{4, 4, 4} : Dims{3, 3, 3};
    const auto grid = VoxelGrid::build(test::random_geometry(d, 1e-6 * (t + 1), 0.6, rng));
    const auto set = assemble_toeplitz(grid.dims(), grid.dx());
    const CirculantKernels kernels(set);
    const CirculantOperator op(kernels, grid, kOmega);
    const auto Z = assemble_dense_Z(set, grid, kOmega);
    for (int r = 0; r < 10; ++r) {
      const auto x = test::random_vector(static_cast<std::size_t>(op.current_size()), rng);
      EXPECT_LE(test::relative_error(op.apply_Z(x), dense_apply(Z, x)), 1e-12);
    }
  }
}

TEST(OpFft, CompressedMatchesDenseWithinTol) {
  std::mt19937_64 rng(22);
  const auto grid = VoxelGrid::build(test::random_geometry({6, 5, 4}, 1e-6, 0.7, rng));
  const auto set = assemble_toeplitz(grid.dims(), grid.dx());
  const CirculantKernels plain(set), packed(set, {true, 1e-8});
  const CirculantOperator a(plain, grid, kOmega), b(packed, grid, kOmega);
  const auto x = test::random_vector(static_cast<std::size_t>(a.current_size()), rng);
  EXPECT_LE(test::relative_error(b.apply_Z(x), a.apply_Z(x)), 1e-7);
  EXPECT_GT(packed.stats().ratio(), 1.0);
  EXPECT_EQ(plain.stats().ratio(), 1.0);
  // Uncompressed spectra keep one real octant each.
  EXPECT_LT(8 * plain.stats().resident_bytes, plain.stats().dense_bytes);
}

TEST(OpFft, SingleVoxelHandEvaluation) {
  const auto grid = VoxelGrid::build(test::single_box({1, 1, 1}, 2e-7, test::copper()));
  const auto set = assemble_toeplitz(grid.dims(), grid.dx());
  const CirculantKernels kernels(set);
  EXPECT_EQ(kernels.padded_dims(), (Dims{2, 2, 2}));
  const CirculantOperator op(kernels, grid, kOmega);
  std::vector<cplx> x(5, 0.0);
  x[0] = 1.0;
  const auto y = op.apply_Z(x);
  const cplx pre = green_prefactor(kOmega, kMu0, grid.dx());
  const cplx zx = diagonal_terms(grid, kOmega).z[0][0];
  const cplx want = zx + pre * set.block(BlockId::XX)(0, 0, 0);
  EXPECT_NEAR(std::abs(y[0] - want), 0.0, 1e-12 * std::abs(want));
  EXPECT_NEAR(std::abs(y[1]), 0.0, 1e-12 * std::abs(want));
  EXPECT_NEAR(std::abs(y[2]), 0.0, 1e-12 * std::abs(want));
  // (x,2D) and (x,3D) vanish at the coincident offset by parity.
  EXPECT_NEAR(std::abs(y[3]), 0.0, 1e-12 * std::abs(want));
  EXPECT_NEAR(std::abs(y[4]), 0.0, 1e-12 * std::abs(want));
}

TEST(OpFft, ZeroInZeroOut) {
  std::mt19937_64 rng(23);
  const auto grid = VoxelGrid::build(test::random_geometry({3, 3, 2}, 1e-6, 0.8, rng));
  const CirculantKernels kernels(assemble_toeplitz(grid.dims(), grid.dx()));
  const CirculantOperator op(kernels, grid, kOmega);
  const std::vector<cplx> x(static_cast<std::size_t>(op.current_size()), 0.0);
  for (const cplx v : op.apply_Z(x)) EXPECT_EQ(v, cplx(0.0));
}

TEST(OpFft, DiagonalMatchesDense) {
  std::mt19937_64 rng(24);
  const auto grid = VoxelGrid::build(test::random_geometry({3, 4, 3}, 5e-7, 0.6, rng));
  const auto set = assemble_toeplitz(grid.dims(), grid.dx());
  const CirculantKernels kernels(set);
  const CirculantOperator op(kernels, grid, kOmega);
  const auto Z = assemble_dense_Z(set, grid, kOmega);
  const auto diag = op.diagonal();
  for (Index i = 0; i < Z.rows(); ++i) EXPECT_NEAR(std::abs(diag[i] - Z(i, i)), 0.0, 1e-13 * std::abs(Z(i, i)));
}

TEST(OpFft, DenseZIsComplexSymmetric) {
  std::mt19937_64 rng(25);
  const auto grid = VoxelGrid::build(test::random_geometry({4, 4, 4}, 1e-6, 0.5, rng));
  const auto Z = assemble_dense_Z(assemble_toeplitz(grid.dims(), grid.dx()), grid, kOmega);
  EXPECT_LE((Z - Z.transpose()).norm() / Z.norm(), 1e-12);
}

TEST(OpFft, PureSuperconductorIsImaginary) {
  auto g = test::single_box({3, 2, 2}, 1e-7, test::niobium());
  const auto grid = VoxelGrid::build(g);
  const auto Z = assemble_dense_Z(assemble_toeplitz(grid.dims(), grid.dx()), grid, kOmega);
  const DenseMatrix<cplx> scaled = Z / cplx(0.0, kOmega);
  EXPECT_LE(scaled.imag().norm() / scaled.norm(), 1e-12);
}

TEST(OpFft, SpectrumIsHermitian) {
  const CirculantKernels kernels(assemble_toeplitz({3, 2, 2}));
  const Dims p = kernels.padded_dims();
  Array3<cplx> s(p);
  kernels.spectrum(BlockId::X3D, s.data());
  auto neg = [](Index i, Index n) { return (n - i) % n; };
  for (Index k = 0; k < p.z; ++k)
    for (Index j = 0; j < p.y; ++j)
      for (Index i = 0; i < p.x; ++i)
        EXPECT_NEAR(std::abs(s(i, j, k) - std::conj(s(neg(i, p.x), neg(j, p.y), neg(k, p.z)))), 0.0, 1e-14);
}

TEST(OpFft, StoredSpectrumMatchesFreshTransform) {
  const CirculantKernels kernels(assemble_toeplitz({3, 2, 4}));
  const Dims p = kernels.padded_dims();
  const auto n = static_cast<std::size_t>(p.total());
  for (const auto& b : all_blocks()) {
    Fft3 fft(p);
    const auto e = kernels.embed(b.id);
    std::copy(e.values().begin(), e.values().end(), fft.buffer());
    fft.forward();
    std::vector<cplx> got(n);
    kernels.spectrum(b.id, got.data());
    double err = 0.0, ref = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      err = std::max(err, std::abs(got[q] - fft.buffer()[q]));
      ref = std::max(ref, std::abs(fft.buffer()[q]));
    }
    EXPECT_LE(err, 1e-14 * ref) << std::string(b.tag.data(), 2);
  }
}

TEST(OpFft, SystemBlocks) {
  std::mt19937_64 rng(26);
  const auto grid = VoxelGrid::build(test::random_geometry({3, 3, 3}, 1e-6, 0.7, rng));
  const NodeIndex nodes(grid);
  const auto A = build_incidence(grid, nodes).matrix;
  const CirculantKernels kernels(assemble_toeplitz(grid.dims(), grid.dx()));
  const CirculantOperator op(kernels, grid, kOmega);
  const auto n5 = static_cast<std::size_t>(op.current_size());
  const auto m = static_cast<std::size_t>(A.rows());

  // Phi = 0: second block is A I.
  auto v = test::random_vector(n5 + m, rng);
  std::fill(v.begin() + static_cast<long>(n5), v.end(), 0.0);
  std::vector<cplx> out(n5 + m);
  apply_system(op, A, v, out);
  const Eigen::VectorXcd AI = A.cast<cplx>() * Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Index>(n5));
  for (std::size_t r = 0; r < m; ++r) EXPECT_NEAR(std::abs(out[n5 + r] - AI[static_cast<Index>(r)]), 0.0, 1e-12);

  // I = 0: first block is -A^T Phi, second is zero.
  v = test::random_vector(n5 + m, rng);
  std::fill(v.begin(), v.begin() + static_cast<long>(n5), 0.0);
  apply_system(op, A, v, out);
  const Eigen::VectorXcd ATp =
      A.transpose().cast<cplx>() * Eigen::Map<const Eigen::VectorXcd>(v.data() + n5, static_cast<Index>(m));
  for (std::size_t r = 0; r < n5; ++r) EXPECT_NEAR(std::abs(out[r] + ATp[static_cast<Index>(r)]), 0.0, 1e-12);
  for (std::size_t r = 0; r < m; ++r) EXPECT_EQ(out[n5 + r], cplx(0.0));
}

TEST(OpFft, ApplyCostScalesNearLinearly) {
  struct Case {
    VoxelGrid grid;
    CirculantKernels kernels;
    CirculantOperator op;
    std::vector<cplx> x, y;
    double best = 1e300;
    explicit Case(Index n)
        : grid(VoxelGrid::build(test::single_box({n, n, n}, 1e-6, test::copper()))),
          kernels(assemble_toeplitz(grid.dims(), grid.dx())),
          op(kernels, grid, kOmega),
          x(static_cast<std::size_t>(op.current_size()), 1.0),
          y(x.size()) {
      op.apply_Z(x, y);
    }
    void time() {
      const auto t0 = std::chrono::steady_clock::now();
      op.apply_Z(x, y);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
  };
  Case small(16), large(32);
  // Interleaved so both sizes see the same machine load.
  for (int r = 0; r < 30; ++r) {
    small.time();
    large.time();
  }
  // 8x the cells; 10x leaves room for the log factor.
  EXPECT_LT(large.best / small.best, 10.0) << small.best << " " << large.best;
}

TEST(OpFft, RejectsMismatchedKernels) {
  const auto grid = VoxelGrid::build(test::single_box({2, 2, 2}, 1e-6, test::copper()));
  const CirculantKernels wrong_dims(assemble_toeplitz({3, 2, 2}, 1e-6));
  EXPECT_THROW(CirculantOperator(wrong_dims, grid, kOmega), std::invalid_argument);
  const CirculantKernels wrong_dx(assemble_toeplitz({2, 2, 2}, 2e-6));
  EXPECT_THROW(CirculantOperator(wrong_dx, grid, kOmega), std::invalid_argument);
}

}  // namespace
}  // namespace svx

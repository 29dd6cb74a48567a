#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"

namespace svx {
namespace {

constexpr double kPi = std::numbers::pi;

// Coincident unit cubes split into n^3 sub-cubes. Distinct sub-cube pairs use
// the midpoint rule; the n^3 self pairs are the same integral scaled by h^5
// (and h^7 for the doubly linear moment), which closes the recursion.
struct SubdivisionOracle {
  double g0;
  double px;
};

SubdivisionOracle subdivision_self(int n) {
  const double h = 1.0 / n;
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = (i + 0.5) * h - 0.5;
  auto centred = [&](int a) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      if (i - a >= 0 && i - a < n) s += c[i] * c[i - a];
    return s;
  };
  double dg = 0.0, dp = 0.0;
  for (int a = -(n - 1); a < n; ++a)
    for (int b = -(n - 1); b < n; ++b)
      for (int k = -(n - 1); k < n; ++k) {
        if (a == 0 && b == 0 && k == 0) continue;
        const double g = 1.0 / (4.0 * kPi * h * std::sqrt(double(a * a + b * b + k * k)));
        const double yz = double(n - std::abs(b)) * double(n - std::abs(k));
        dg += double(n - std::abs(a)) * yz * g;
        dp += centred(a) * yz * g;
      }
  const double h6 = std::pow(h, 6);
  const double g0 = dg * h6 / (1.0 - std::pow(h, 2));
  double sum_c2 = 0.0;
  for (double v : c) sum_c2 += v * v;
  const double px = (dp * h6 + g0 * std::pow(h, 5) * sum_c2 * n * n) / (1.0 - std::pow(h, 4));
  return {g0, px};
}

SubdivisionOracle richardson_self() {
  const auto a = subdivision_self(32);
  const auto b = subdivision_self(64);
  return {(4.0 * b.g0 - a.g0) / 3.0, (4.0 * b.px - a.px) / 3.0};
}

TEST(Kernels, SelfTermMatchesSubdivisionOracle) {
  const auto oracle = richardson_self();
  const double v = galerkin_integral(BlockId::XX, {0, 0, 0});
  EXPECT_NEAR(v / oracle.g0, 1.0, 1e-6);
  const auto m = green_moments({0, 0, 0});
  EXPECT_NEAR(m.p[0] / oracle.px, 1.0, 1e-5);
}

TEST(Kernels, SelfTermClosedForm) {
  // Closed-form value of the coincident unit-cube Coulomb integral over 4 pi.
  const double closed = 0.149789680899495692;
  EXPECT_NEAR(galerkin_integral(BlockId::XX, {0, 0, 0}), closed, 1e-13);
}

TEST(Kernels, OddBlocksVanishAtCoincidence) {
  for (BlockId id : {BlockId::X2D, BlockId::X3D, BlockId::Y2D, BlockId::Y3D, BlockId::Z3D})
    EXPECT_NEAR(galerkin_integral(id, {0, 0, 0}), 0.0, 1e-15);
}

TEST(Kernels, FarFieldIsPointCharge) {
  const double v = galerkin_integral(BlockId::XX, {10, 0, 0});
  EXPECT_NEAR(v, 1.0 / (40.0 * kPi), 0.01 / (40.0 * kPi));
  const auto m = green_moments({10, 0, 0}, 1.0);
  const auto r = green_moments({10, 0, 0}, 1.0, 16);
  EXPECT_NEAR(m.g0, r.g0, 1e-14);
}

TEST(Kernels, ScheduleAgreesWithHighOrder) {
  for (const Offset o : {Offset{0, 0, 0}, Offset{1, 0, 0}, Offset{1, 1, 0}, Offset{2, 1, 1}, Offset{3, 0, 2},
                         Offset{5, 4, 1}, Offset{9, 0, 0}, Offset{30, 2, 7}}) {
    const auto m = green_moments(o);
    const auto r = green_moments(o, 1.0, 18);
    const double scale = r.g0;
    EXPECT_NEAR(m.g0, r.g0, 1e-10 * scale);
    for (int a = 0; a < 3; ++a) {
      EXPECT_NEAR(m.s[a], r.s[a], 1e-10 * scale);
      EXPECT_NEAR(m.p[a], r.p[a], 1e-10 * scale);
    }
  }
}

TEST(Kernels, SingleVoxelDomain) {
  const auto set = assemble_toeplitz({1, 1, 1});
  for (const auto& b : all_blocks()) EXPECT_EQ(set.block(b.id).size(), 1u);
  EXPECT_EQ(set.block(BlockId::X2D)(0, 0, 0), 0.0);
  EXPECT_GT(set.block(BlockId::XX)(0, 0, 0), 0.0);
}

TEST(Kernels, TwoVoxelNeighbourBelowSelf) {
  const auto set = assemble_toeplitz({2, 1, 1});
  const auto& xx = set.block(BlockId::XX);
  EXPECT_GT(xx(1, 0, 0), 0.0);
  EXPECT_LT(xx(1, 0, 0), xx(0, 0, 0));
  EXPECT_NEAR(xx(1, 0, 0), green_moments({1, 0, 0}, 1.0, 20).g0, 1e-12);
}

TEST(Kernels, ScalingLawDxTwo) {
  const Dims d{4, 3, 2};
  const auto unit = assemble_toeplitz(d, 1.0);
  const auto two = assemble_toeplitz(d, 2.0);
  for (const auto& b : all_blocks()) {
    auto scaled = unit.block(b.id);
    scaled *= 32.0;
    if (scaled.frobenius_norm() > 0.0) EXPECT_LE(relative_frobenius(two.block(b.id), scaled), 1e-10);
  }
}

TEST(Kernels, ReciprocityOfTransposedPairs) {
  const auto set = assemble_toeplitz({3, 3, 3});
  for (Basis a : kAllBases)
    for (Basis b : kAllBases)
      for (Index m = -2; m <= 2; ++m)
        for (Index n = -2; n <= 2; ++n)
          for (Index p = -2; p <= 2; ++p)
            EXPECT_DOUBLE_EQ(set.value(a, b, m, n, p), set.value(b, a, -m, -n, -p));
}

TEST(Kernels, AlignedBlocksEqualAndAxisSymmetric) {
  const auto set = assemble_toeplitz({4, 4, 4});
  const auto& xx = set.block(BlockId::XX);
  EXPECT_EQ(relative_frobenius(set.block(BlockId::YY), xx), 0.0);
  EXPECT_EQ(relative_frobenius(set.block(BlockId::ZZ), xx), 0.0);
  for (Index k = 0; k < 4; ++k)
    for (Index j = 0; j < 4; ++j)
      for (Index i = 0; i < 4; ++i) {
        EXPECT_GT(xx(i, j, k), 0.0);
        EXPECT_NEAR(xx(i, j, k), xx(j, k, i), 1e-13 * xx(0, 0, 0));
        EXPECT_NEAR(xx(i, j, k), xx(k, i, j), 1e-13 * xx(0, 0, 0));
      }
}

TEST(Kernels, ParityOfStoredBlocks) {
  const auto set = assemble_toeplitz({3, 3, 3});
  EXPECT_DOUBLE_EQ(set.value(BlockId::X2D, -1, 2, 0), -set.value(BlockId::X2D, 1, 2, 0));
  EXPECT_DOUBLE_EQ(set.value(BlockId::X2D, 1, -2, 0), set.value(BlockId::X2D, 1, 2, 0));
  EXPECT_DOUBLE_EQ(set.value(BlockId::Z3D, 1, 1, -2), -set.value(BlockId::Z3D, 1, 1, 2));
  // Direct odd-offset evaluation agrees with the parity rule.
  EXPECT_NEAR(galerkin_integral(BlockId::X3D, {-2, 1, 0}), set.value(BlockId::X3D, -2, 1, 0), 1e-15);
  EXPECT_NEAR(galerkin_integral(BlockId::Y2D, {1, -1, 2}), set.value(BlockId::Y2D, 1, -1, 2), 1e-15);
}

TEST(Kernels, QuadratureRejectsNothingOnNearOffsets) {
  for (Index i = -2; i <= 2; ++i)
    for (Index j = -2; j <= 2; ++j)
      for (Index k = -2; k <= 2; ++k) EXPECT_NO_THROW((void)galerkin_integral(BlockId::D3D3, {i, j, k}, 0.3));
}

TEST(TwoFluid, PureSuperconductor) {
  const double lambda = 9e-8, omega = 2 * kPi * 1e9;
  const auto c = two_fluid_coeffs({"s", 0.0, lambda}, omega);
  EXPECT_EQ(c.a, 0.0);
  EXPECT_DOUBLE_EQ(c.b, lambda * lambda);
}

TEST(TwoFluid, UnitProduct) {
  const double lambda = 1e-7, omega = 2 * kPi * 5e9;
  const double sigma0 = 1.0 / (omega * kMu0 * lambda * lambda);
  const auto c = two_fluid_coeffs({"s", sigma0, lambda}, omega);
  const double wl = omega * kMu0 * lambda * lambda;
  EXPECT_NEAR(c.a, sigma0 * wl * wl / 2.0, 1e-12 * c.a);
  EXPECT_NEAR(c.b, lambda * lambda / 2.0, 1e-12 * c.b);
}

TEST(TwoFluid, InverseOfComplexConductivity) {
  const double omega = 2 * kPi * 3e9;
  for (double sigma0 : {0.0, 1e5, 2e7})
    for (double lambda : {5e-8, 9e-8, 3e-7}) {
      const auto c = two_fluid_coeffs({"s", sigma0, lambda}, omega);
      const cplx sigma = cplx(sigma0, 0.0) + 1.0 / cplx(0.0, omega * kMu0 * lambda * lambda);
      const cplx prod = c.c(omega) * sigma;
      EXPECT_NEAR(prod.real(), 1.0, 1e-12);
      EXPECT_NEAR(prod.imag(), 0.0, 1e-12);
    }
}

TEST(TwoFluid, NormalLimit) {
  const double omega = 2 * kPi * 1e9, sigma0 = 5.8e7;
  const auto c = two_fluid_coeffs({"cu", sigma0, kNormalConductor}, omega);
  EXPECT_DOUBLE_EQ(c.a, 1.0 / sigma0);
  EXPECT_EQ(c.b, 0.0);
  // A large but finite depth approaches the same resistivity.
  const auto big = two_fluid_coeffs({"cu", sigma0, 1.0}, omega);
  EXPECT_NEAR(big.c(omega).real(), 1.0 / sigma0, 1e-6 / sigma0);
  EXPECT_LT(std::abs(big.c(omega).imag()), 1e-4 / sigma0);
}

TEST(TwoFluid, RejectsInvalidInput) {
  EXPECT_THROW((void)two_fluid_coeffs({"s", 0.0, 1e-7}, 0.0), std::invalid_argument);
  EXPECT_THROW((void)two_fluid_coeffs({"s", -1.0, 1e-7}, 1.0), std::invalid_argument);
  EXPECT_THROW((void)two_fluid_coeffs({"s", 0.0, kNormalConductor}, 1.0), std::invalid_argument);
}

TEST(Diagonal, ConductionTerms) {
  const double omega = 2 * kPi * 1e9;
  const auto sc = VoxelGrid::build(test::single_box({2, 1, 1}, 1e-7, test::niobium()));
  const auto d = diagonal_terms(sc, omega);
  for (Basis b : kAllBases)
    for (const cplx z : d.z[static_cast<int>(b)]) {
      EXPECT_EQ(z.real(), 0.0);
      EXPECT_GT(z.imag(), 0.0);
    }
  const auto zx = d.z[static_cast<int>(Basis::X)][0];
  EXPECT_NEAR(std::abs(d.z[static_cast<int>(Basis::ThreeD)][0] / zx - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d.z[static_cast<int>(Basis::TwoD)][0] / zx - 1.0 / 6.0), 0.0, 1e-15);

  const auto half = VoxelGrid::build(test::single_box({2, 1, 1}, 0.5e-7, test::niobium()));
  const auto dh = diagonal_terms(half, omega);
  for (Basis b : kAllBases)
    EXPECT_NEAR(std::abs(dh.z[static_cast<int>(b)][0] / d.z[static_cast<int>(b)][0]), 2.0, 1e-14);
}

}  // namespace
}  // namespace svx

#include "svx/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace svx {

namespace {

constexpr int kMaxOrder = 64;

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

Rule compute_rule(int n) {
  Rule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    // map [-1, 1] -> [0, 1]
    r.x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    r.w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace

GaussRule gauss_legendre(int order) {
  if (order < 1 || order > kMaxOrder) throw std::invalid_argument("gauss_legendre: unsupported order");
  static std::array<Rule, kMaxOrder + 1> rules;
  static std::array<std::once_flag, kMaxOrder + 1> flags;
  std::call_once(flags[static_cast<std::size_t>(order)],
                 [order] { rules[static_cast<std::size_t>(order)] = compute_rule(order); });
  const Rule& r = rules[static_cast<std::size_t>(order)];
  return {r.x, r.w};
}

}  // namespace svx

#pragma once

#include <span>

namespace svx {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};

/// Rules are computed once per order and cached for the process lifetime.
/// Supported orders: 1..64.
[[nodiscard]] GaussRule gauss_legendre(int order);

}  // namespace svx

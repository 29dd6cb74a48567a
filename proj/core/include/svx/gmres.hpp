#pragma once

#include <functional>
#include <span>
#include <vector>

#include "svx/types.hpp"

namespace svx {

/// y = Op(x); x and y never alias.
using LinearMap = std::function<void(std::span<const cplx>, std::span<cplx>)>;

struct GmresOptions {
  double rre = 1e-8;
  int restart = 50;
  int max_iters = 3000;
};

struct GmresResult {
  int iterations = 0;
  bool converged = false;
  /// Final ||M (b - A x)|| / ||M b||.
  double relative_residual = 0.0;
  /// Preconditioned relative residual after each inner iteration.
  std::vector<double> history;
};

/// Left-preconditioned restarted GMRES over complex scalars. `x` holds the
/// initial guess on entry and the last iterate on return. `precond` may be
/// empty (no preconditioning).
GmresResult gmres_solve(const LinearMap& op, const LinearMap& precond, std::span<const cplx> rhs, std::span<cplx> x,
                        const GmresOptions& opts = {});

}  // namespace svx

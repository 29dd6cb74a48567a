#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "svx/voxgrid.hpp"

namespace svx {

struct AmgOptions {
  /// Strength threshold: |a_ij| >= theta sqrt(a_ii a_jj).
  double strength = 0.08;
  Index coarse_size = 256;
  int max_levels = 25;
  /// Smooth the tentative prolongator with one damped-Jacobi step.
  bool smooth_prolongator = false;
};

/// Aggregation AMG hierarchy for a symmetric positive definite matrix.
/// One V-cycle with symmetric Gauss-Seidel smoothing is a symmetric
/// preconditioner, usable inside CG.
class AmgHierarchy {
 public:
  AmgHierarchy() = default;
  explicit AmgHierarchy(const SparseMatrix& A, AmgOptions opts = {});

  /// x = M^{-1} r (one V-cycle from a zero guess).
  void vcycle(const Eigen::VectorXd& r, Eigen::VectorXd& x) const;

  [[nodiscard]] int levels() const noexcept { return static_cast<int>(ops_.size()); }
  [[nodiscard]] Index size(int level) const { return ops_[level].rows(); }
  /// Sum of nnz over all level operators divided by nnz of the finest.
  [[nodiscard]] double operator_complexity() const;
  [[nodiscard]] std::size_t memory_bytes() const;

 private:
  void cycle(int level, const Eigen::VectorXd& b, Eigen::VectorXd& x) const;

  std::vector<SparseMatrix> ops_;
  std::vector<SparseMatrix> prolong_;
  std::vector<Eigen::VectorXd> inv_diag_;
  Eigen::LDLT<Eigen::MatrixXd> coarse_;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients on S b = e, starting from b (resized to
/// zero when empty). With `project_constant`, e and the iterates are kept
/// orthogonal to the constant vector (singular Laplacian-like S).
/// Pass amg = nullptr for plain CG.
CgResult amg_cg_solve(const SparseMatrix& S, const Eigen::VectorXd& e, Eigen::VectorXd& b, double tol,
                      int max_iter, const AmgHierarchy* amg, bool project_constant = false);

}  // namespace svx

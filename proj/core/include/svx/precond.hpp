#pragma once

#include <memory>
#include <span>
#include <vector>

#include "svx/amg.hpp"
#include "svx/opfft.hpp"
#include "svx/voxgrid.hpp"

namespace svx {

enum class SchurKind { Direct, AmgCg };

[[nodiscard]] const char* to_string(SchurKind k) noexcept;

struct SchurOptions {
  SchurKind kind = SchurKind::AmgCg;
  double tol = 1e-8;
  int max_iter = 1000;
  AmgOptions amg{};
};

/// Sparse approximation Q = [Y, -A^T; A, 0] of the saddle-point matrix, with
/// Y the magnitudes of the Z diagonal, inverted through S = A Y^{-1} A^T.
class SchurPreconditioner {
 public:
  /// `ybar` has one positive entry per column of A.
  SchurPreconditioner(std::vector<double> ybar, const SparseMatrix& A, SchurOptions opts = {});
  ~SchurPreconditioner();
  SchurPreconditioner(SchurPreconditioner&&) noexcept;
  SchurPreconditioner& operator=(SchurPreconditioner&&) noexcept;

  /// Y from |diag Z| of the operator.
  static SchurPreconditioner from_operator(const CirculantOperator& op, const SparseMatrix& A,
                                           SchurOptions opts = {});

  /// [a; b] = Q^{-1} [c; d]. Throws ConvergenceError when the Schur solve fails.
  void apply(std::span<const cplx> in, std::span<cplx> out) const;

  /// Q [a; b], for round-trip checks.
  void apply_q(std::span<const cplx> in, std::span<cplx> out) const;

  [[nodiscard]] Index current_size() const noexcept { return static_cast<Index>(ybar_.size()); }
  [[nodiscard]] Index node_size() const noexcept { return A_.rows(); }
  [[nodiscard]] const std::vector<double>& ybar() const noexcept { return ybar_; }
  [[nodiscard]] const SparseMatrix& schur() const noexcept { return S_; }
  /// Rows pinned to zero potential, one per floating component of S.
  [[nodiscard]] const std::vector<Index>& grounded() const noexcept { return grounded_; }
  [[nodiscard]] SchurKind kind() const noexcept { return opts_.kind; }

  /// Bytes held by the Schur solver (factor or AMG hierarchy plus work vectors).
  [[nodiscard]] std::size_t solver_memory_bytes() const;
  /// Schur solves performed and CG iterations summed over them (AMG-CG only).
  [[nodiscard]] long schur_solves() const noexcept;
  [[nodiscard]] long cg_iterations() const noexcept;

 private:
  struct Impl;
  std::vector<double> ybar_;
  SparseMatrix A_;
  SparseMatrix S_;
  std::vector<Index> grounded_;
  SchurOptions opts_;
  std::unique_ptr<Impl> impl_;
};

/// Node sets of S that form floating components (S 1 = 0 on the component).
/// Returns the lowest node index of each such component.
[[nodiscard]] std::vector<Index> floating_reference_nodes(const SparseMatrix& S);

/// S = A diag(w) A^T, symmetric by construction.
[[nodiscard]] SparseMatrix weighted_laplacian(const SparseMatrix& A, std::span<const double> w);

}  // namespace svx

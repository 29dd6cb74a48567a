#include "svx/precond.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace svx {

const char* to_string(SchurKind k) noexcept { return k == SchurKind::Direct ? "direct" : "amg"; }

SparseMatrix weighted_laplacian(const SparseMatrix& A, std::span<const double> w) {
  if (static_cast<Index>(w.size()) != A.cols()) throw std::invalid_argument("weighted_laplacian: weight size");
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator i(A, c); i; ++i)
      for (SparseMatrix::InnerIterator j(A, c); j; ++j)
        if (j.row() >= i.row()) trip.emplace_back(i.row(), j.row(), i.value() * w[c] * j.value());
  }
  SparseMatrix upper(A.rows(), A.rows());
  upper.setFromTriplets(trip.begin(), trip.end());
  SparseMatrix S = upper.selfadjointView<Eigen::Upper>();
  S.makeCompressed();
  return S;
}

std::vector<Index> floating_reference_nodes(const SparseMatrix& S) {
  const Index n = S.rows();
  const Eigen::VectorXd rowsum = S * Eigen::VectorXd::Ones(n);
  std::vector<Index> comp(static_cast<std::size_t>(n), -1);
  std::vector<Index> out;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    bool floating = true;
    comp[s] = s;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      double diag = 0.0;
      for (SparseMatrix::InnerIterator it(S, i); it; ++it) {
        if (it.row() == i) diag = std::abs(it.value());
        if (comp[it.row()] < 0 && it.value() != 0.0) {
          comp[it.row()] = s;
          stack.push_back(it.row());
        }
      }
      if (std::abs(rowsum[i]) > 1e-12 * diag) floating = false;
    }
    if (floating) out.push_back(s);
  }
  return out;
}

struct SchurPreconditioner::Impl {
  std::vector<Index> to_reduced;  // full row -> reduced row, or -1 when grounded
  SparseMatrix reduced;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  AmgHierarchy amg;
  mutable std::atomic<long> solves{0};
  mutable std::atomic<long> iterations{0};
};

SchurPreconditioner::SchurPreconditioner(std::vector<double> ybar, const SparseMatrix& A, SchurOptions opts)
    : ybar_(std::move(ybar)), A_(A), opts_(opts), impl_(std::make_unique<Impl>()) {
  if (static_cast<Index>(ybar_.size()) != A.cols())
    throw std::invalid_argument("SchurPreconditioner: Y size must match incidence columns");
  for (double y : ybar_)
    if (!(y > 0.0) || !std::isfinite(y))
      throw std::invalid_argument("SchurPreconditioner: Y entries must be positive (malformed material?)");
  if (!(opts_.tol > 0.0)) throw std::invalid_argument("SchurPreconditioner: tol must be positive");

  std::vector<double> inv(ybar_.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / ybar_[i];
  S_ = weighted_laplacian(A_, inv);

  grounded_ = floating_reference_nodes(S_);
  const Index n = S_.rows();
  impl_->to_reduced.assign(static_cast<std::size_t>(n), 0);
  for (Index g : grounded_) impl_->to_reduced[g] = -1;
  Index next = 0;
  for (Index i = 0; i < n; ++i)
    if (impl_->to_reduced[i] >= 0) impl_->to_reduced[i] = next++;
  if (next == 0) return;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(S_.nonZeros()));
  for (int c = 0; c < S_.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(S_, c); it; ++it) {
      const Index r = impl_->to_reduced[it.row()], cc = impl_->to_reduced[c];
      if (r >= 0 && cc >= 0) trip.emplace_back(static_cast<int>(r), static_cast<int>(cc), it.value());
    }
  impl_->reduced.resize(static_cast<int>(next), static_cast<int>(next));
  impl_->reduced.setFromTriplets(trip.begin(), trip.end());
  impl_->reduced.makeCompressed();

  if (opts_.kind == SchurKind::Direct) {
    impl_->ldlt.compute(impl_->reduced);
    if (impl_->ldlt.info() != Eigen::Success) throw ConvergenceError("Schur complement factorization failed");
  } else {
    impl_->amg = AmgHierarchy(impl_->reduced, opts_.amg);
  }
}

SchurPreconditioner::~SchurPreconditioner() = default;
SchurPreconditioner::SchurPreconditioner(SchurPreconditioner&&) noexcept = default;
SchurPreconditioner& SchurPreconditioner::operator=(SchurPreconditioner&&) noexcept = default;

SchurPreconditioner SchurPreconditioner::from_operator(const CirculantOperator& op, const SparseMatrix& A,
                                                       SchurOptions opts) {
  const auto d = op.diagonal();
  std::vector<double> y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) y[i] = std::abs(d[i]);
  return SchurPreconditioner(std::move(y), A, opts);
}

void SchurPreconditioner::apply(std::span<const cplx> in, std::span<cplx> out) const {
  const Index n5 = current_size();
  const Index m = node_size();
  if (static_cast<Index>(in.size()) != n5 + m || static_cast<Index>(out.size()) != n5 + m)
    throw std::invalid_argument("SchurPreconditioner::apply: vector length must be 5K + M");
  using CVec = Eigen::VectorXcd;
  Eigen::Map<const CVec> c(in.data(), n5);
  Eigen::Map<const CVec> d(in.data() + n5, m);
  const Eigen::Map<const Eigen::VectorXd> y(ybar_.data(), n5);

  const CVec yc = c.cwiseQuotient(y.cast<cplx>());
  const CVec e = d - A_.cast<cplx>() * yc;

  CVec b = CVec::Zero(m);
  const Index nr = impl_->reduced.rows();
  if (nr > 0) {
    for (int part = 0; part < 2; ++part) {
      Eigen::VectorXd er(nr);
      for (Index i = 0; i < m; ++i) {
        const Index r = impl_->to_reduced[i];
        if (r >= 0) er[r] = part == 0 ? e[i].real() : e[i].imag();
      }
      Eigen::VectorXd br;
      if (opts_.kind == SchurKind::Direct) {
        br = impl_->ldlt.solve(er);
      } else if (er.norm() > 0.0) {
        const CgResult res = amg_cg_solve(impl_->reduced, er, br, opts_.tol, opts_.max_iter, &impl_->amg);
        impl_->iterations.fetch_add(res.iterations);
        if (!res.converged)
          throw ConvergenceError("Schur CG did not converge (relative residual " +
                                 std::to_string(res.relative_residual) + ")");
      } else {
        br = Eigen::VectorXd::Zero(nr);
      }
      impl_->solves.fetch_add(1);
      for (Index i = 0; i < m; ++i) {
        const Index r = impl_->to_reduced[i];
        if (r < 0) continue;
        if (part == 0)
          b[i].real(br[r]);
        else
          b[i].imag(br[r]);
      }
    }
  }
  Eigen::Map<CVec> a_out(out.data(), n5);
  Eigen::Map<CVec> b_out(out.data() + n5, m);
  a_out = (c + A_.transpose().cast<cplx>() * b).cwiseQuotient(y.cast<cplx>());
  b_out = b;
}

void SchurPreconditioner::apply_q(std::span<const cplx> in, std::span<cplx> out) const {
  const Index n5 = current_size();
  const Index m = node_size();
  if (static_cast<Index>(in.size()) != n5 + m || static_cast<Index>(out.size()) != n5 + m)
    throw std::invalid_argument("SchurPreconditioner::apply_q: vector length must be 5K + M");
  using CVec = Eigen::VectorXcd;
  Eigen::Map<const CVec> a(in.data(), n5);
  Eigen::Map<const CVec> b(in.data() + n5, m);
  const Eigen::Map<const Eigen::VectorXd> y(ybar_.data(), n5);
  Eigen::Map<CVec>(out.data(), n5) = a.cwiseProduct(y.cast<cplx>()) - A_.transpose().cast<cplx>() * b;
  Eigen::Map<CVec>(out.data() + n5, m) = A_.cast<cplx>() * a;
}

std::size_t SchurPreconditioner::solver_memory_bytes() const {
  const Index n = impl_->reduced.rows();
  if (n == 0) return 0;
  if (opts_.kind == SchurKind::Direct) {
    const auto nnz = static_cast<std::size_t>(impl_->ldlt.matrixL().nestedExpression().nonZeros());
    const auto nn = static_cast<std::size_t>(n);
    // factor (values + row indices + column pointers), D, permutation and its inverse
    return nnz * (sizeof(double) + sizeof(int)) + (nn + 1) * sizeof(int) + nn * sizeof(double) +
           2 * nn * sizeof(int);
  }
  return impl_->amg.memory_bytes();
}

long SchurPreconditioner::schur_solves() const noexcept { return impl_->solves.load(); }
long SchurPreconditioner::cg_iterations() const noexcept { return impl_->iterations.load(); }

}  // namespace svx

#include "svx/amg.hpp"

#include <cmath>
#include <stdexcept>

namespace svx {

namespace {

using Vec = Eigen::VectorXd;

// The operators are symmetric, so column j of a column-major matrix is row j.
void gauss_seidel(const SparseMatrix& A, const Vec& inv_diag, const Vec& b, Vec& x, bool forward) {
  const Index n = A.cols();
  for (Index s = 0; s < n; ++s) {
    const Index i = forward ? s : n - 1 - s;
    double acc = b[i];
    double diag = 0.0;
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      if (it.row() == i)
        diag = it.value();
      else
        acc -= it.value() * x[it.row()];
    }
    if (diag != 0.0) x[i] = acc * inv_diag[i];
  }
}

std::vector<Index> aggregate(const SparseMatrix& A, double theta, Index& count) {
  const Index n = A.cols();
  Vec d = A.diagonal();
  std::vector<std::vector<Index>> strong(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      const Index i = it.row();
      if (i != j && std::abs(it.value()) >= theta * std::sqrt(std::abs(d[i] * d[j]))) strong[j].push_back(i);
    }

  std::vector<Index> agg(static_cast<std::size_t>(n), -1);
  count = 0;
  for (Index i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    bool free = true;
    for (Index j : strong[i])
      if (agg[j] >= 0) {
        free = false;
        break;
      }
    if (!free) continue;
    agg[i] = count;
    for (Index j : strong[i]) agg[j] = count;
    ++count;
  }
  // Attach leftovers to the aggregate of their strongest aggregated neighbour.
  std::vector<Index> pass2 = agg;
  for (Index i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    double best = -1.0;
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      const Index j = it.row();
      if (j == i || agg[j] < 0) continue;
      if (std::abs(it.value()) > best) {
        best = std::abs(it.value());
        pass2[i] = agg[j];
      }
    }
  }
  agg = std::move(pass2);
  for (Index i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    agg[i] = count;
    for (Index j : strong[i])
      if (agg[j] < 0) agg[j] = count;
    ++count;
  }
  return agg;
}

double spectral_radius_dinv_a(const SparseMatrix& A, const Vec& inv_diag) {
  const Index n = A.rows();
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) * 0.7);
  v.normalize();
  double rho = 1.0;
  for (int it = 0; it < 20; ++it) {
    Vec w = inv_diag.cwiseProduct(A * v);
    rho = w.norm();
    if (rho == 0.0) return 1.0;
    v = w / rho;
  }
  return rho;
}

}  // namespace

AmgHierarchy::AmgHierarchy(const SparseMatrix& A, AmgOptions opts) {
  if (A.rows() != A.cols()) throw std::invalid_argument("AmgHierarchy: matrix must be square");
  if (A.rows() == 0) throw std::invalid_argument("AmgHierarchy: empty matrix");
  SparseMatrix cur = A;
  while (true) {
    Vec inv = cur.diagonal();
    for (Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] != 0.0 ? 1.0 / inv[i] : 0.0;
    const Index n = cur.rows();
    ops_.push_back(cur);
    inv_diag_.push_back(inv);
    if (n <= opts.coarse_size || static_cast<int>(ops_.size()) >= opts.max_levels) break;

    Index nagg = 0;
    const std::vector<Index> agg = aggregate(cur, opts.strength, nagg);
    if (nagg >= n || static_cast<double>(nagg) > 0.9 * static_cast<double>(n)) break;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(agg[i]), 1.0);
    SparseMatrix P(static_cast<int>(n), static_cast<int>(nagg));
    P.setFromTriplets(trip.begin(), trip.end());
    if (opts.smooth_prolongator) {
      const double omega = 4.0 / (3.0 * spectral_radius_dinv_a(cur, inv));
      SparseMatrix DA = inv.asDiagonal() * cur;
      SparseMatrix sm = P - omega * (DA * P);
      sm.prune(0.0);
      P = sm;
    }
    SparseMatrix Pt = P.transpose();
    SparseMatrix coarse = Pt * (cur * P);
    SparseMatrix coarse_t = coarse.transpose();
    cur = 0.5 * (coarse + coarse_t);
    cur.prune(0.0);
    prolong_.push_back(std::move(P));
  }
  coarse_.compute(Eigen::MatrixXd(ops_.back()));
}

void AmgHierarchy::cycle(int level, const Vec& b, Vec& x) const {
  if (level + 1 == levels()) {
    x = coarse_.solve(b);
    return;
  }
  const auto& A = ops_[level];
  x.setZero(b.size());
  gauss_seidel(A, inv_diag_[level], b, x, true);
  const Vec r = b - A * x;
  const Vec rc = prolong_[level].transpose() * r;
  Vec xc;
  cycle(level + 1, rc, xc);
  x += prolong_[level] * xc;
  gauss_seidel(A, inv_diag_[level], b, x, false);
}

void AmgHierarchy::vcycle(const Vec& r, Vec& x) const {
  if (ops_.empty()) throw std::logic_error("AmgHierarchy: not built");
  cycle(0, r, x);
}

double AmgHierarchy::operator_complexity() const {
  double total = 0.0;
  for (const auto& op : ops_) total += static_cast<double>(op.nonZeros());
  return ops_.empty() ? 0.0 : total / static_cast<double>(ops_.front().nonZeros());
}

std::size_t AmgHierarchy::memory_bytes() const {
  auto sparse_bytes = [](const SparseMatrix& m) {
    return static_cast<std::size_t>(m.nonZeros()) * (sizeof(double) + sizeof(int)) +
           static_cast<std::size_t>(m.outerSize() + 1) * sizeof(int);
  };
  std::size_t bytes = 0;
  // The finest operator belongs to the caller; count only what the hierarchy adds.
  for (std::size_t l = 1; l < ops_.size(); ++l) bytes += sparse_bytes(ops_[l]);
  for (const auto& p : prolong_) bytes += sparse_bytes(p);
  for (const auto& d : inv_diag_) bytes += static_cast<std::size_t>(d.size()) * sizeof(double);
  const auto nc = static_cast<std::size_t>(ops_.empty() ? 0 : ops_.back().rows());
  bytes += nc * nc * sizeof(double);
  // CG work vectors and V-cycle temporaries on the finest level.
  if (!ops_.empty()) bytes += 8 * static_cast<std::size_t>(ops_.front().rows()) * sizeof(double);
  return bytes;
}

CgResult amg_cg_solve(const SparseMatrix& S, const Vec& e, Vec& b, double tol, int max_iter, const AmgHierarchy* amg,
                      bool project_constant) {
  const Index n = S.rows();
  if (S.cols() != n || e.size() != n) throw std::invalid_argument("amg_cg_solve: size mismatch");
  auto project = [&](Vec& v) {
    if (project_constant) v.array() -= v.mean();
  };
  Vec rhs = e;
  project(rhs);
  if (b.size() != n) b = Vec::Zero(n);
  project(b);

  CgResult res;
  const double norm_e = rhs.norm();
  if (norm_e == 0.0) {
    b.setZero();
    res.converged = true;
    return res;
  }
  Vec r = rhs - S * b;
  project(r);
  res.relative_residual = r.norm() / norm_e;
  if (res.relative_residual <= tol) {
    res.converged = true;
    return res;
  }
  Vec z;
  auto precondition = [&](const Vec& in, Vec& out) {
    if (amg)
      amg->vcycle(in, out);
    else
      out = in;
    project(out);
  };
  precondition(r, z);
  Vec p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    const Vec q = S * p;
    const double pq = p.dot(q);
    if (pq <= 0.0) break;
    const double alpha = rz / pq;
    b += alpha * p;
    r -= alpha * q;
    res.iterations = it;
    res.relative_residual = r.norm() / norm_e;
    if (res.relative_residual <= tol) {
      res.converged = true;
      break;
    }
    precondition(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

}  // namespace svx

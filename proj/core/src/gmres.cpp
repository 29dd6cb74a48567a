#include "svx/gmres.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace svx {

namespace {

using CVec = Eigen::VectorXcd;

// Givens rotation zeroing b in (a, b).
void make_rotation(cplx a, cplx b, double& c, cplx& s) {
  const double na = std::abs(a);
  if (na == 0.0) {
    c = 0.0;
    s = 1.0;
    return;
  }
  const double norm = std::hypot(na, std::abs(b));
  c = na / norm;
  s = (a / na) * std::conj(b) / norm;
}

}  // namespace

GmresResult gmres_solve(const LinearMap& op, const LinearMap& precond, std::span<const cplx> rhs, std::span<cplx> x,
                        const GmresOptions& opts) {
  const auto n = static_cast<Index>(rhs.size());
  if (static_cast<Index>(x.size()) != n) throw std::invalid_argument("gmres_solve: size mismatch");
  if (!(opts.rre > 0.0 && opts.rre < 1.0)) throw std::invalid_argument("gmres_solve: rre must be in (0, 1)");
  if (opts.restart < 1) throw std::invalid_argument("gmres_solve: restart must be >= 1");

  CVec tmp(n), work(n);
  auto apply_m = [&](const CVec& in, CVec& out) {
    if (precond)
      precond(std::span<const cplx>(in.data(), static_cast<std::size_t>(n)),
              std::span<cplx>(out.data(), static_cast<std::size_t>(n)));
    else
      out = in;
  };
  auto apply_a = [&](const CVec& in, CVec& out) {
    op(std::span<const cplx>(in.data(), static_cast<std::size_t>(n)),
       std::span<cplx>(out.data(), static_cast<std::size_t>(n)));
  };

  GmresResult res;
  Eigen::Map<CVec> xv(x.data(), n);
  const CVec b = Eigen::Map<const CVec>(rhs.data(), n);
  CVec mb(n);
  apply_m(b, mb);
  const double norm_b = mb.norm();
  if (norm_b == 0.0) {
    xv.setZero();
    res.converged = true;
    return res;
  }

  const int m = opts.restart;
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  std::vector<double> cs(static_cast<std::size_t>(m));
  std::vector<cplx> sn(static_cast<std::size_t>(m));
  CVec g(m + 1);

  while (true) {
    // r = M (b - A x)
    apply_a(xv, tmp);
    work = b - tmp;
    CVec r(n);
    apply_m(work, r);
    const double beta = r.norm();
    res.relative_residual = beta / norm_b;
    if (res.relative_residual <= opts.rre) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= opts.max_iters) return res;

    V.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    H.setZero();
    int j = 0;
    for (; j < m && res.iterations < opts.max_iters; ++j) {
      apply_a(V.col(j), tmp);
      CVec w(n);
      apply_m(tmp, w);
      // Modified Gram-Schmidt, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const cplx h = V.col(i).dot(w);
          H(i, j) += h;
          w -= h * V.col(i);
        }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      if (hn > 0.0) V.col(j + 1) = w / hn;

      for (int i = 0; i < j; ++i) {
        const cplx t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn[i]) * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      make_rotation(H(j, j), H(j + 1, j), cs[j], sn[j]);
      H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
      H(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];

      ++res.iterations;
      const double est = std::abs(g[j + 1]) / norm_b;
      res.history.push_back(est);
      if (est <= opts.rre || hn == 0.0) {
        ++j;
        break;
      }
    }
    // x += V y with H y = g (upper triangular)
    const Eigen::MatrixXcd Hj = H.topLeftCorner(j, j);
    const CVec y = Hj.triangularView<Eigen::Upper>().solve(g.head(j));
    xv += V.leftCols(j) * y;
  }
}

}  // namespace svx

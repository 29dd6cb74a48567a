#include "svx/tucker.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace svx {

namespace {

template <class T>
using MapM = Eigen::Map<DenseMatrix<T>>;
template <class T>
using CMapM = Eigen::Map<const DenseMatrix<T>>;

/// Adjoint of the mode-i unfolding: (product of the other extents) x D_i.
template <class T>
DenseMatrix<T> unfolding_adjoint(const Array3<T>& a, int mode) {
  const Dims d = a.dims();
  switch (mode) {
    case 0:
      return CMapM<T>(a.data(), d.x, d.y * d.z).adjoint();
    case 1: {
      DenseMatrix<T> out(d.x * d.z, d.y);
      for (Index k = 0; k < d.z; ++k)
        for (Index j = 0; j < d.y; ++j)
          for (Index i = 0; i < d.x; ++i) out(i + d.x * k, j) = a(i, j, k);
      return out.conjugate();
    }
    default:
      return CMapM<T>(a.data(), d.x * d.y, d.z).conjugate();
  }
}

/// Left singular vectors and values of the unfolding, via QR of its adjoint.
template <class T>
std::pair<DenseMatrix<T>, Eigen::VectorXd> left_svd(const Array3<T>& a, int mode) {
  DenseMatrix<T> at = unfolding_adjoint(a, mode);
  const Index rows = at.rows();
  const Index cols = at.cols();
  DenseMatrix<T> small;
  if (rows > cols) {
    Eigen::HouseholderQR<DenseMatrix<T>> qr(at);
    small = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
    small = small.adjoint().eval();
  } else {
    small = at.adjoint();
  }
  Eigen::BDCSVD<DenseMatrix<T>> svd(small, Eigen::ComputeThinU);
  return {svd.matrixU(), svd.singularValues()};
}

Index choose_rank(const Eigen::VectorXd& sv, double total_norm, double tol) {
  const double thresh = tol / std::sqrt(3.0);
  const Index n = sv.size();
  if (n == 0 || sv[0] == 0.0) return 1;
  // tail[r] = energy discarded when keeping r values
  Eigen::VectorXd tail(n + 1);
  tail[n] = 0.0;
  for (Index k = n - 1; k >= 0; --k) tail[k] = tail[k + 1] + sv[k] * sv[k];
  for (Index r = 1; r <= n; ++r) {
    const bool by_value = r == n || sv[r] / sv[0] < thresh;
    const bool by_energy = std::sqrt(tail[r]) <= thresh * total_norm;
    if (by_value && by_energy) return r;
  }
  return n;
}

}  // namespace

template <class T>
Array3<T> mode_product(const Array3<T>& tensor, const DenseMatrix<T>& f, int mode) {
  const Dims d = tensor.dims();
  if (mode < 0 || mode > 2) throw std::invalid_argument("mode_product: mode must be 0, 1 or 2");
  if (f.cols() != d[mode])
    throw std::invalid_argument("mode_product: factor has " + std::to_string(f.cols()) +
                                " columns, tensor extent is " + std::to_string(d[mode]));
  const Index r = f.rows();
  switch (mode) {
    case 0: {
      Array3<T> out({r, d.y, d.z});
      MapM<T>(out.data(), r, d.y * d.z).noalias() = f * CMapM<T>(tensor.data(), d.x, d.y * d.z);
      return out;
    }
    case 1: {
      Array3<T> out({d.x, r, d.z});
      for (Index k = 0; k < d.z; ++k) {
        CMapM<T> slab(tensor.data() + d.x * d.y * k, d.x, d.y);
        MapM<T>(out.data() + d.x * r * k, d.x, r).noalias() = slab * f.transpose();
      }
      return out;
    }
    default: {
      Array3<T> out({d.x, d.y, r});
      MapM<T>(out.data(), d.x * d.y, r).noalias() = CMapM<T>(tensor.data(), d.x * d.y, d.z) * f.transpose();
      return out;
    }
  }
}

template <class T>
TuckerTensor<T> tucker_svd(const Array3<T>& tensor, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tucker_svd: tol must be positive");
  if (tensor.empty()) throw std::invalid_argument("tucker_svd: empty tensor");
  TuckerTensor<T> out;
  out.original = tensor.dims();
  out.tol = tol;
  const double norm = tensor.frobenius_norm();
  if (norm == 0.0) {
    out.core = Array3<T>({1, 1, 1});
    for (int m = 0; m < 3; ++m) out.factors[m] = DenseMatrix<T>::Identity(tensor.dims()[m], 1);
    return out;
  }
  Array3<T> core = tensor;
  for (int m = 0; m < 3; ++m) {
    auto [u, sv] = left_svd(core, m);
    const Index r = choose_rank(sv, norm, tol);
    out.factors[m] = u.leftCols(r);
    core = mode_product<T>(core, out.factors[m].adjoint(), m);
  }
  out.core = std::move(core);
  return out;
}

template <class T>
Array3<T> reconstruct(const TuckerTensor<T>& t) {
  Array3<T> a = mode_product(t.core, t.factors[0], 0);
  a = mode_product(a, t.factors[1], 1);
  return mode_product(a, t.factors[2], 2);
}

template <class T>
Array3<T> reconstruct_leading(const TuckerTensor<T>& t, Dims sub) {
  if (!sub.fits_in(t.original))
    throw std::invalid_argument("reconstruct_leading: " + to_string(sub) + " exceeds " + to_string(t.original));
  Array3<T> a = mode_product<T>(t.core, t.factors[0].topRows(sub.x), 0);
  a = mode_product<T>(a, t.factors[1].topRows(sub.y), 1);
  return mode_product<T>(a, t.factors[2].topRows(sub.z), 2);
}

template struct TuckerTensor<double>;
template struct TuckerTensor<cplx>;

#define SVX_INSTANTIATE(T)                                                               \
  template Array3<T> mode_product<T>(const Array3<T>&, const DenseMatrix<T>&, int);      \
  template TuckerTensor<T> tucker_svd<T>(const Array3<T>&, double);                      \
  template Array3<T> reconstruct<T>(const TuckerTensor<T>&);                             \
  template Array3<T> reconstruct_leading<T>(const TuckerTensor<T>&, Dims);

SVX_INSTANTIATE(double)
SVX_INSTANTIATE(cplx)

#undef SVX_INSTANTIATE

}  // namespace svx

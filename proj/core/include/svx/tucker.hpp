#pragma once

#include <array>

#include <Eigen/Dense>

#include "svx/array3.hpp"
#include "svx/types.hpp"

namespace svx {

template <class T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// O = C x1 F1 x2 F2 x3 F3 with orthonormal factor columns.
template <class T>
struct TuckerTensor {
  Array3<T> core;
  std::array<DenseMatrix<T>, 3> factors;
  Dims original{};
  double tol = 0.0;

  [[nodiscard]] Dims ranks() const noexcept { return core.dims(); }
  /// Stored scalars: d1 d2 d3 + sum D_i d_i.
  [[nodiscard]] std::size_t compressed_size() const noexcept {
    std::size_t n = core.size();
    for (const auto& f : factors) n += static_cast<std::size_t>(f.size());
    return n;
  }
  [[nodiscard]] std::size_t dense_size() const noexcept { return static_cast<std::size_t>(original.total()); }
};

/// i-mode product (mode = 0, 1, 2): result extent along `mode` is F.rows().
/// Throws std::invalid_argument when F.cols() differs from the tensor extent.
template <class T>
[[nodiscard]] Array3<T> mode_product(const Array3<T>& tensor, const DenseMatrix<T>& factor, int mode);

/// Sequentially truncated HOSVD. Per mode, the kept rank d is the smallest
/// with every discarded sigma_k / sigma_1 below tol/sqrt(3) and the discarded
/// energy below tol/sqrt(3) of ||O||_F, which bounds the relative
/// reconstruction error by tol. An all-zero tensor yields ranks (1,1,1).
template <class T>
[[nodiscard]] TuckerTensor<T> tucker_svd(const Array3<T>& tensor, double tol);

template <class T>
[[nodiscard]] Array3<T> reconstruct(const TuckerTensor<T>& t);

/// Leading sub-block of the reconstruction, computed from trimmed factor rows.
template <class T>
[[nodiscard]] Array3<T> reconstruct_leading(const TuckerTensor<T>& t, Dims sub);

extern template struct TuckerTensor<double>;
extern template struct TuckerTensor<cplx>;

}  // namespace svx

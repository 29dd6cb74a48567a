#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "svx/types.hpp"

namespace svx {

/// Dense 3-D array, x fastest. Mode-1 unfoldings are plain column-major views.
template <class T>
class Array3 {
 public:
  using value_type = T;

  Array3() = default;
  explicit Array3(Dims dims, T fill = T{})
      : dims_(dims), data_(static_cast<std::size_t>(dims.total()), fill) {}

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::size_t linear(Index i, Index j, Index k) const noexcept {
    return static_cast<std::size_t>(i + dims_.x * (j + dims_.y * k));
  }

  T& operator()(Index i, Index j, Index k) noexcept { return data_[linear(i, j, k)]; }
  const T& operator()(Index i, Index j, Index k) const noexcept { return data_[linear(i, j, k)]; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  [[nodiscard]] double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  /// Leading sub-block [0, sub.x) x [0, sub.y) x [0, sub.z).
  [[nodiscard]] Array3 leading(Dims sub) const {
    Array3 out(sub);
    for (Index k = 0; k < sub.z; ++k)
      for (Index j = 0; j < sub.y; ++j)
        std::copy_n(&data_[linear(0, j, k)], sub.x, &out.data_[out.linear(0, j, k)]);
    return out;
  }

  Array3& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

 private:
  Dims dims_{};
  std::vector<T> data_;
};

/// ||a - b||_F / ||b||_F
template <class T>
[[nodiscard]] double relative_frobenius(const Array3<T>& a, const Array3<T>& b) {
  double num = 0.0, den = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    num += std::norm(av[i] - bv[i]);
    den += std::norm(bv[i]);
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace svx

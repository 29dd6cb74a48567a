#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace svx {

using cplx = std::complex<double>;
using Index = std::int64_t;

/// Permeability of free space, H/m.
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;

/// Voxel counts along x, y, z.
struct Dims {
  Index x = 0;
  Index y = 0;
  Index z = 0;

  [[nodiscard]] constexpr Index total() const noexcept { return x * y * z; }
  [[nodiscard]] constexpr Index operator[](int axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  [[nodiscard]] constexpr Index max() const noexcept {
    return x > y ? (x > z ? x : z) : (y > z ? y : z);
  }
  [[nodiscard]] constexpr bool fits_in(const Dims& other) const noexcept {
    return x <= other.x && y <= other.y && z <= other.z;
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

using Offset = std::array<Index, 3>;

/// Current basis families carried by every non-empty voxel.
enum class Basis : std::uint8_t { X = 0, Y = 1, Z = 2, TwoD = 3, ThreeD = 4 };
inline constexpr int kNumBases = 5;

inline constexpr std::array<Basis, kNumBases> kAllBases = {Basis::X, Basis::Y, Basis::Z,
                                                           Basis::TwoD, Basis::ThreeD};

[[nodiscard]] constexpr int index_of(Basis b) noexcept { return static_cast<int>(b); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed geometry, materials or ports.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  [[nodiscard]] double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class CacheError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace svx

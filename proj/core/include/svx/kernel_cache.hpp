#pragma once

#include <array>
#include <filesystem>

#include "svx/kernels.hpp"
#include "svx/tucker.hpp"

namespace svx {

/// Tucker-compressed unit-edge Toeplitz kernels for a maximum domain.
struct KernelCache {
  static constexpr std::uint32_t kVersion = 1;

  double tol = 0.0;
  Dims n_max{};
  std::array<TuckerTensor<double>, kNumBlocks> blocks;
};

/// Compresses every block of a unit-edge kernel set. Throws if set.dx() != 1.
[[nodiscard]] KernelCache compress_kernels(const ToeplitzKernelSet& set, double tol);

/// Assembles the unit-edge kernels on n_max and compresses them.
[[nodiscard]] KernelCache build_kernel_cache(Dims n_max, double tol);

/// Binary little-endian "SVXT" file with trailing CRC-32.
void cache_write(const KernelCache& cache, const std::filesystem::path& path);
void cache_write(const ToeplitzKernelSet& set, double tol, const std::filesystem::path& path);

/// Loads and validates a cache file (magic, version, checksum, layout).
[[nodiscard]] KernelCache cache_load(const std::filesystem::path& path);

/// Trims every block to `dims` from trimmed factor rows and multiplies by dx^5.
/// Throws CacheError("cache too small ...") when dims exceed n_max.
[[nodiscard]] ToeplitzKernelSet restore_kernels(const KernelCache& cache, Dims dims, double dx);

[[nodiscard]] ToeplitzKernelSet cache_read(const std::filesystem::path& path, Dims dims, double dx);

}  // namespace svx

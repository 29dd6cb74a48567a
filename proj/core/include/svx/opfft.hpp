#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <vector>

#include "svx/kernels.hpp"
#include "svx/tucker.hpp"
#include "svx/voxgrid.hpp"

namespace svx {

/// In-place 3-D complex FFT on an x-fastest array. Plans are built with
/// FFTW_ESTIMATE, so results do not depend on run-time measurements.
class Fft3 {
 public:
  explicit Fft3(Dims dims);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  /// Aligned scratch buffer of dims().total() values.
  [[nodiscard]] cplx* buffer() noexcept { return buf_; }
  void forward() noexcept;
  /// Unnormalized inverse.
  void inverse() noexcept;

 private:
  Dims dims_;
  cplx* buf_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

struct CirculantOptions {
  bool compress = false;
  double tol = 1e-8;
};

struct CompressionStats {
  std::size_t dense_bytes = 0;
  /// Tucker storage, or dense_bytes when uncompressed.
  std::size_t stored_bytes = 0;
  /// Bytes actually held, including the octant layout of uncompressed spectra.
  std::size_t resident_bytes = 0;
  std::array<Dims, kNumBlocks> ranks{};
  [[nodiscard]] double ratio() const noexcept {
    return stored_bytes ? static_cast<double>(dense_bytes) / static_cast<double>(stored_bytes) : 1.0;
  }
};

/// FFT-domain circulant embeddings (2Kx x 2Ky x 2Kz) of every stored block,
/// without the Green prefactor. Frequency independent.
class CirculantKernels {
 public:
  explicit CirculantKernels(ToeplitzKernelSet set, CirculantOptions opts = {});

  [[nodiscard]] const Dims& grid_dims() const noexcept { return toeplitz_.dims(); }
  [[nodiscard]] const Dims& padded_dims() const noexcept { return padded_; }
  [[nodiscard]] double dx() const noexcept { return toeplitz_.dx(); }
  [[nodiscard]] bool compressed() const noexcept { return opts_.compress; }
  [[nodiscard]] const CirculantOptions& options() const noexcept { return opts_; }
  [[nodiscard]] const ToeplitzKernelSet& toeplitz() const noexcept { return toeplitz_; }
  [[nodiscard]] const CompressionStats& stats() const noexcept { return stats_; }

  /// Writes the spectrum of a stored block into `out` (padded_dims().total()
  /// values), restoring it from its Tucker form when compressed.
  void spectrum(BlockId id, cplx* out) const;
  /// Uncompressed spectra of real kernels with fixed parity are purely real
  /// or purely imaginary, and even or odd per frequency axis; only the
  /// nonnegative-frequency octant of that part is stored. Writes line (j, k)
  /// of it, padded_dims().x values. Uncompressed only.
  void spectrum_line(BlockId id, Index j, Index k, double* out) const;
  [[nodiscard]] bool imaginary_spectrum(BlockId id) const noexcept { return imaginary_[static_cast<int>(id)]; }

  /// Spatial embedding of a stored block: offsets 0..K-1 at the front,
  /// negative offsets wrapped to the back, zero at index K.
  [[nodiscard]] Array3<double> embed(BlockId id) const;

 private:
  ToeplitzKernelSet toeplitz_;
  CirculantOptions opts_;
  Dims padded_{};
  std::array<Array3<double>, kNumBlocks> octant_;
  std::array<bool, kNumBlocks> imaginary_{};
  std::array<TuckerTensor<cplx>, kNumBlocks> tucker_;
  CompressionStats stats_;
};

/// Green prefactor jw mu / dx^4 applied to the dx^5-scaled kernels.
[[nodiscard]] inline cplx green_prefactor(double omega, double mu, double dx) {
  return {0.0, omega * mu / (dx * dx * dx * dx)};
}

/// Impedance operator Z of the current block at one frequency.
class CirculantOperator {
 public:
  CirculantOperator(const CirculantKernels& kernels, const VoxelGrid& grid, double omega, double mu = kMu0);

  [[nodiscard]] Index voxel_count() const noexcept { return K_; }
  [[nodiscard]] Index current_size() const noexcept { return kNumBases * K_; }
  [[nodiscard]] double omega() const noexcept { return omega_; }
  [[nodiscard]] cplx prefactor() const noexcept { return prefactor_; }
  [[nodiscard]] const DiagonalTerms& conduction() const noexcept { return diag_; }
  [[nodiscard]] const CirculantKernels& kernels() const noexcept { return *kernels_; }

  /// CC = Z I for a 5K current vector.
  void apply_Z(std::span<const cplx> in, std::span<cplx> out) const;
  [[nodiscard]] std::vector<cplx> apply_Z(std::span<const cplx> in) const;

  /// Diagonal of Z: z^b plus the offset-zero self kernel.
  [[nodiscard]] std::vector<cplx> diagonal() const;

  /// Cumulative seconds spent restoring compressed blocks and in apply_Z.
  [[nodiscard]] double restore_seconds() const noexcept { return restore_s_.load(); }
  [[nodiscard]] double apply_seconds() const noexcept { return apply_s_.load(); }
  [[nodiscard]] long apply_count() const noexcept { return applies_.load(); }

 private:
  const CirculantKernels* kernels_;
  Index K_;
  double omega_;
  cplx prefactor_;
  DiagonalTerms diag_;
  std::vector<std::size_t> scatter_;
  // FFT plan and spectral scratch, reused across applies (serialized).
  struct Workspace;
  std::shared_ptr<Workspace> ws_;
  mutable std::atomic<double> restore_s_{0.0};
  mutable std::atomic<double> apply_s_{0.0};
  mutable std::atomic<long> applies_{0};
};

/// Saddle-point matvec [Z I - A^T Phi ; A I] for any incidence A with 5K columns.
void apply_system(const CirculantOperator& op, const SparseMatrix& A, std::span<const cplx> in,
                  std::span<cplx> out);

/// Brute-force dense Z (5K x 5K) from the Toeplitz kernels, for verification.
[[nodiscard]] DenseMatrix<cplx> assemble_dense_Z(const ToeplitzKernelSet& set, const VoxelGrid& grid,
                                                 double omega, double mu = kMu0);

}  // namespace svx

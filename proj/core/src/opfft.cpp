#include "svx/opfft.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <mutex>
#include <optional>
#include <stdexcept>

#include <fftw3.h>

namespace svx {

namespace {

// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Fft3::Fft3(Dims dims) : dims_(dims) {
  const auto n = static_cast<std::size_t>(dims.total());
  buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!buf_) throw std::bad_alloc();
  std::fill_n(buf_, n, cplx{});
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  std::lock_guard lock(plan_mutex());
  const int nz = static_cast<int>(dims.z), ny = static_cast<int>(dims.y), nx = static_cast<int>(dims.x);
  fwd_ = fftw_plan_dft_3d(nz, ny, nx, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_3d(nz, ny, nx, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft3::~Fft3() {
  std::lock_guard lock(plan_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(buf_);
}

void Fft3::forward() noexcept { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void Fft3::inverse() noexcept { fftw_execute(static_cast<fftw_plan>(inv_)); }

CirculantKernels::CirculantKernels(ToeplitzKernelSet set, CirculantOptions opts)
    : toeplitz_(std::move(set)), opts_(opts) {
  const Dims g = toeplitz_.dims();
  if (g.x < 1 || g.y < 1 || g.z < 1) throw std::invalid_argument("CirculantKernels: empty kernel set");
  if (opts_.compress && !(opts_.tol > 0.0)) throw std::invalid_argument("CirculantKernels: tol must be positive");
  padded_ = {2 * g.x, 2 * g.y, 2 * g.z};
  const auto n = static_cast<std::size_t>(padded_.total());
  Fft3 fft(padded_);
  for (const auto& b : all_blocks()) {
    const Array3<double> e = embed(b.id);
    std::copy(e.values().begin(), e.values().end(), fft.buffer());
    fft.forward();
    Array3<cplx> spec(padded_);
    std::copy_n(fft.buffer(), n, spec.data());
    const int id = static_cast<int>(b.id);
    stats_.dense_bytes += n * sizeof(cplx);
    if (opts_.compress) {
      tucker_[id] = tucker_svd(spec, opts_.tol);
      stats_.ranks[id] = tucker_[id].ranks();
      stats_.stored_bytes += tucker_[id].compressed_size() * sizeof(cplx);
      stats_.resident_bytes += tucker_[id].compressed_size() * sizeof(cplx);
    } else {
      const auto& odd = block_info(b.id).odd;
      imaginary_[id] = (odd[0] + odd[1] + odd[2]) % 2 == 1;
      auto& o = octant_[id];
      o = Array3<double>({g.x + 1, g.y + 1, g.z + 1});
      for (Index k = 0; k <= g.z; ++k)
        for (Index j = 0; j <= g.y; ++j)
          for (Index i = 0; i <= g.x; ++i) o(i, j, k) = imaginary_[id] ? spec(i, j, k).imag() : spec(i, j, k).real();
      stats_.ranks[id] = padded_;
      stats_.stored_bytes += n * sizeof(cplx);
      stats_.resident_bytes += o.size() * sizeof(double);
    }
  }
}

Array3<double> CirculantKernels::embed(BlockId id) const {
  const Dims g = toeplitz_.dims();
  Array3<double> out(padded_);
  auto wrap = [](Index i, Index k) { return i < k ? i : i - 2 * k; };
  for (Index k = 0; k < padded_.z; ++k) {
    if (k == g.z) continue;
    for (Index j = 0; j < padded_.y; ++j) {
      if (j == g.y) continue;
      for (Index i = 0; i < padded_.x; ++i) {
        if (i == g.x) continue;
        out(i, j, k) = toeplitz_.value(id, wrap(i, g.x), wrap(j, g.y), wrap(k, g.z));
      }
    }
  }
  return out;
}

void CirculantKernels::spectrum(BlockId id, cplx* out) const {
  const int i = static_cast<int>(id);
  if (opts_.compress) {
    const Array3<cplx> r = reconstruct(tucker_[i]);
    std::copy(r.values().begin(), r.values().end(), out);
  } else {
    std::vector<double> line(static_cast<std::size_t>(padded_.x));
    for (Index k = 0; k < padded_.z; ++k)
      for (Index j = 0; j < padded_.y; ++j) {
        spectrum_line(id, j, k, line.data());
        cplx* row = out + padded_.x * (j + padded_.y * k);
        for (Index q = 0; q < padded_.x; ++q) row[q] = imaginary_[i] ? cplx(0.0, line[q]) : cplx(line[q], 0.0);
      }
  }
}

void CirculantKernels::spectrum_line(BlockId id, Index j, Index k, double* out) const {
  if (opts_.compress) throw std::logic_error("spectrum_line: kernels are compressed");
  const auto& odd = block_info(id).odd;
  const Dims g = grid_dims();
  const Array3<double>& o = octant_[static_cast<int>(id)];
  // Frequency p and its mirror 2g - p share a value up to the parity sign.
  double sign = 1.0;
  const Index mj = j <= g.y ? j : padded_.y - j;
  const Index mk = k <= g.z ? k : padded_.z - k;
  if (odd[1] && j > g.y) sign = -sign;
  if (odd[2] && k > g.z) sign = -sign;
  const double* src = &o(0, mj, mk);
  for (Index i = 0; i <= g.x; ++i) out[i] = sign * src[i];
  const double sx = odd[0] ? -sign : sign;
  for (Index i = g.x + 1; i < padded_.x; ++i) out[i] = sx * src[padded_.x - i];
}

namespace {

// acc (+)= u * r * x for a real spectrum r and phase u in {1, i, -i}.
enum class Phase { One, PlusI, MinusI };

template <Phase U, bool Add>
void multiply_real(std::size_t n, const double* r, const cplx* x, cplx* acc) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* ap = reinterpret_cast<double*>(acc);
  for (std::size_t q = 0; q < n; ++q) {
    const double xr = xp[2 * q], xi = xp[2 * q + 1];
    double re, im;
    if constexpr (U == Phase::One) {
      re = r[q] * xr;
      im = r[q] * xi;
    } else if constexpr (U == Phase::PlusI) {
      re = -r[q] * xi;
      im = r[q] * xr;
    } else {
      re = r[q] * xi;
      im = -r[q] * xr;
    }
    if constexpr (Add) {
      ap[2 * q] += re;
      ap[2 * q + 1] += im;
    } else {
      ap[2 * q] = re;
      ap[2 * q + 1] = im;
    }
  }
}

template <Phase U>
void multiply_real(bool add, std::size_t n, const double* r, const cplx* x, cplx* acc) {
  if (add)
    multiply_real<U, true>(n, r, x, acc);
  else
    multiply_real<U, false>(n, r, x, acc);
}

// acc += s * x, or conj(s) * x, without the library's NaN-recovery path.
template <bool Conj>
void multiply_add(std::size_t n, const cplx* s, const cplx* x, cplx* acc) {
  const double* sp = reinterpret_cast<const double*>(s);
  const double* xp = reinterpret_cast<const double*>(x);
  double* ap = reinterpret_cast<double*>(acc);
  for (std::size_t q = 0; q < n; ++q) {
    const double sr = sp[2 * q], si = Conj ? -sp[2 * q + 1] : sp[2 * q + 1];
    const double xr = xp[2 * q], xi = xp[2 * q + 1];
    ap[2 * q] += sr * xr - si * xi;
    ap[2 * q + 1] += sr * xi + si * xr;
  }
}

}  // namespace

namespace {

struct FftwFree {
  void operator()(cplx* p) const noexcept { fftw_free(p); }
};
using FftwArray = std::unique_ptr<cplx[], FftwFree>;

FftwArray fftw_array(std::size_t n) {
  FftwArray a(reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n)));
  if (!a) throw std::bad_alloc();
  return a;
}

// In-place transforms of a zero-padded embedding (padded = 2 * grid). Forward
// input and inverse output live in the first octant, so the x and y passes
// skip lines that are identically zero or never read.
class PaddedFft {
 public:
  PaddedFft(Dims grid, Dims padded, Index plane_stride, cplx* scratch) {
    const int gy = static_cast<int>(grid.y), gz = static_cast<int>(grid.z);
    const int px = static_cast<int>(padded.x), py = static_cast<int>(padded.y), pz = static_cast<int>(padded.z);
    const int sxy = static_cast<int>(plane_stride);
    auto* b = reinterpret_cast<fftw_complex*>(scratch);
    std::lock_guard lock(plan_mutex());
    for (int sign : {FFTW_FORWARD, FFTW_BACKWARD}) {
      auto& p = sign == FFTW_FORWARD ? fwd_ : inv_;
      const fftw_iodim lx{px, 1, 1}, ly{py, px, px}, lz{pz, sxy, sxy};
      const fftw_iodim over_x[2] = {{gy, px, px}, {gz, sxy, sxy}};
      const fftw_iodim over_y[2] = {{px, 1, 1}, {gz, sxy, sxy}};
      const fftw_iodim over_z[1] = {{sxy, 1, 1}};
      p[0] = fftw_plan_guru_dft(1, &lx, 2, over_x, b, b, sign, FFTW_ESTIMATE);
      p[1] = fftw_plan_guru_dft(1, &ly, 2, over_y, b, b, sign, FFTW_ESTIMATE);
      p[2] = fftw_plan_guru_dft(1, &lz, 1, over_z, b, b, sign, FFTW_ESTIMATE);
    }
    for (auto* q : {fwd_[0], fwd_[1], fwd_[2], inv_[0], inv_[1], inv_[2]})
      if (!q) throw std::runtime_error("PaddedFft: FFTW planning failed");
  }
  ~PaddedFft() {
    std::lock_guard lock(plan_mutex());
    for (int i = 0; i < 3; ++i) {
      fftw_destroy_plan(fwd_[i]);
      fftw_destroy_plan(inv_[i]);
    }
  }
  PaddedFft(const PaddedFft&) = delete;
  PaddedFft& operator=(const PaddedFft&) = delete;

  // Arrays must come from fftw_malloc.
  void forward(cplx* a) const noexcept {
    auto* b = reinterpret_cast<fftw_complex*>(a);
    for (int i = 0; i < 3; ++i) fftw_execute_dft(fwd_[i], b, b);
  }
  void inverse(cplx* a) const noexcept {
    auto* b = reinterpret_cast<fftw_complex*>(a);
    for (int i = 2; i >= 0; --i) fftw_execute_dft(inv_[i], b, b);
  }

 private:
  fftw_plan fwd_[3]{};
  fftw_plan inv_[3]{};
};

// Workspace plane stride, kept off a power of two so the z pass does not
// thrash cache sets.
Index plane_stride(Dims padded) { return padded.x * padded.y + 8; }

}  // namespace

struct CirculantOperator::Workspace {
  // Allocated on first apply.
  void ensure(Dims grid, Dims padded) {
    if (fft) return;
    const auto n = static_cast<std::size_t>(plane_stride(padded) * padded.z);
    for (int a = 0; a < kNumBases; ++a) {
      xs[a] = fftw_array(n);
      acc[a] = fftw_array(n);
    }
    fft.emplace(grid, padded, plane_stride(padded), xs[0].get());
  }
  std::mutex mutex;
  std::optional<PaddedFft> fft;
  std::array<FftwArray, kNumBases> xs, acc;
  std::vector<cplx> spec;
};

CirculantOperator::CirculantOperator(const CirculantKernels& kernels, const VoxelGrid& grid, double omega, double mu)
    : kernels_(&kernels),
      K_(grid.voxel_count()),
      omega_(omega),
      prefactor_(green_prefactor(omega, mu, kernels.dx())),
      diag_(diagonal_terms(grid, omega, mu)) {
  if (!(kernels.grid_dims() == grid.dims()))
    throw std::invalid_argument("CirculantOperator: kernel dims " + to_string(kernels.grid_dims()) +
                                " do not match grid dims " + to_string(grid.dims()));
  if (kernels.dx() != grid.dx()) throw std::invalid_argument("CirculantOperator: kernel dx differs from grid dx");
  const Dims p = kernels.padded_dims();
  scatter_.resize(static_cast<std::size_t>(K_));
  for (Index v = 0; v < K_; ++v) {
    const auto& pos = grid.position(v);
    scatter_[v] = static_cast<std::size_t>(pos[0] + p.x * pos[1] + plane_stride(p) * pos[2]);
  }
  ws_ = std::make_shared<Workspace>();
}

void CirculantOperator::apply_Z(std::span<const cplx> in, std::span<cplx> out) const {
  const auto t0 = Clock::now();
  const Index n5 = current_size();
  if (static_cast<Index>(in.size()) != n5 || static_cast<Index>(out.size()) != n5)
    throw std::invalid_argument("apply_Z: vector length must be 5K");
  const Dims p = kernels_->padded_dims();
  const auto np = static_cast<std::size_t>(p.total());

  std::lock_guard lock(ws_->mutex);
  ws_->ensure(kernels_->grid_dims(), p);
  const PaddedFft& fft = *ws_->fft;
  auto& spec = ws_->spec;
  if (kernels_->compressed()) spec.resize(np);
  const auto plane = static_cast<std::size_t>(p.x * p.y);
  const auto stride = static_cast<std::size_t>(plane_stride(p));
  const auto nw = stride * static_cast<std::size_t>(p.z);
  std::array<cplx*, kNumBases> xs, acc;
  for (int a = 0; a < kNumBases; ++a) {
    xs[a] = ws_->xs[a].get();
    acc[a] = ws_->acc[a].get();
    std::fill_n(xs[a], nw, cplx{});
    for (Index v = 0; v < K_; ++v) xs[a][scatter_[v]] = in[a * K_ + v];
    fft.forward(xs[a]);
  }

  double restore = 0.0;
  if (kernels_->compressed()) {
    // Restored one block at a time; tiling would not pay for the extra buffers.
    for (cplx* a : acc) std::fill_n(a, nw, cplx{});
    for (const auto& b : all_blocks()) {
      const auto tr = Clock::now();
      kernels_->spectrum(b.id, spec.data());
      restore += seconds_since(tr);
      const int beta = index_of(b.test), alpha = index_of(b.source);
      for (std::size_t k = 0; k < static_cast<std::size_t>(p.z); ++k) {
        const cplx* sk = spec.data() + plane * k;
        multiply_add<false>(plane, sk, xs[alpha] + stride * k, acc[beta] + stride * k);
        if (alpha != beta) multiply_add<true>(plane, sk, xs[beta] + stride * k, acc[alpha] + stride * k);
      }
    }
  } else {
    // One padded x-line at a time, expanded from the stored octant.
    const Index px = p.x;
    std::vector<double> line(static_cast<std::size_t>(px));
    for (Index k = 0; k < p.z; ++k)
      for (Index j = 0; j < p.y; ++j) {
        const auto c = static_cast<std::size_t>(px * j) + stride * static_cast<std::size_t>(k);
        const auto len = static_cast<std::size_t>(px);
        // The first contribution to each accumulator overwrites it.
        std::array<bool, kNumBases> live{};
        auto add = [&](int target, bool imag, Phase conj_sign, const cplx* x) {
          const bool a = live[target];
          live[target] = true;
          cplx* out = acc[target] + c;
          if (!imag)
            multiply_real<Phase::One>(a, len, line.data(), x, out);
          else if (conj_sign == Phase::PlusI)
            multiply_real<Phase::PlusI>(a, len, line.data(), x, out);
          else
            multiply_real<Phase::MinusI>(a, len, line.data(), x, out);
        };
        for (const auto& b : all_blocks()) {
          kernels_->spectrum_line(b.id, j, k, line.data());
          const bool imag = kernels_->imaginary_spectrum(b.id);
          const int beta = index_of(b.test), alpha = index_of(b.source);
          add(beta, imag, Phase::PlusI, xs[alpha] + c);
          // Transposed block: kernel reversed in space, conjugated spectrum.
          if (alpha != beta) add(alpha, imag, Phase::MinusI, xs[beta] + c);
        }
      }
  }

  const cplx scale = prefactor_ / static_cast<double>(np);
  for (int b = 0; b < kNumBases; ++b) {
    fft.inverse(acc[b]);
    const auto& z = diag_.z[b];
    for (Index v = 0; v < K_; ++v) out[b * K_ + v] = z[v] * in[b * K_ + v] + scale * acc[b][scatter_[v]];
  }
  restore_s_.fetch_add(restore);
  apply_s_.fetch_add(seconds_since(t0));
  applies_.fetch_add(1);
}

std::vector<cplx> CirculantOperator::apply_Z(std::span<const cplx> in) const {
  std::vector<cplx> out(in.size());
  apply_Z(in, out);
  return out;
}

std::vector<cplx> CirculantOperator::diagonal() const {
  const auto& set = kernels_->toeplitz();
  std::vector<cplx> d(static_cast<std::size_t>(current_size()));
  for (Basis b : kAllBases) {
    const int bi = index_of(b);
    const cplx self = prefactor_ * set.value(b, b, 0, 0, 0);
    for (Index v = 0; v < K_; ++v) d[bi * K_ + v] = diag_.z[bi][v] + self;
  }
  return d;
}

void apply_system(const CirculantOperator& op, const SparseMatrix& A, std::span<const cplx> in,
                  std::span<cplx> out) {
  const Index n5 = op.current_size();
  const Index m = A.rows();
  if (A.cols() != n5) throw std::invalid_argument("apply_system: incidence must have 5K columns");
  if (static_cast<Index>(in.size()) != n5 + m || static_cast<Index>(out.size()) != n5 + m)
    throw std::invalid_argument("apply_system: vector length must be 5K + M");
  using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
  Eigen::Map<const CVec> I(in.data(), n5);
  Eigen::Map<const CVec> phi(in.data() + n5, m);
  op.apply_Z(in.subspan(0, static_cast<std::size_t>(n5)), out.subspan(0, static_cast<std::size_t>(n5)));
  Eigen::Map<CVec> top(out.data(), n5);
  Eigen::Map<CVec> bottom(out.data() + n5, m);
  top -= A.transpose().cast<cplx>() * phi;
  bottom = A.cast<cplx>() * I;
}

DenseMatrix<cplx> assemble_dense_Z(const ToeplitzKernelSet& set, const VoxelGrid& grid, double omega, double mu) {
  const Index K = grid.voxel_count();
  const cplx pre = green_prefactor(omega, mu, set.dx());
  const DiagonalTerms diag = diagonal_terms(grid, omega, mu);
  DenseMatrix<cplx> Z = DenseMatrix<cplx>::Zero(kNumBases * K, kNumBases * K);
  for (Basis test : kAllBases)
    for (Basis src : kAllBases)
      for (Index l = 0; l < K; ++l)
        for (Index k = 0; k < K; ++k) {
          const auto& pl = grid.position(l);
          const auto& pk = grid.position(k);
          const double t = set.value(test, src, pl[0] - pk[0], pl[1] - pk[1], pl[2] - pk[2]);
          Z(index_of(test) * K + l, index_of(src) * K + k) = pre * t;
        }
  for (Basis b : kAllBases)
    for (Index v = 0; v < K; ++v) Z(index_of(b) * K + v, index_of(b) * K + v) += diag.z[index_of(b)][v];
  return Z;
}

}  // namespace svx

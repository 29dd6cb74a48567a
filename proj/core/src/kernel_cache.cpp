#include "svx/kernel_cache.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <zlib.h>

namespace svx {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'V', 'X', 'T'};

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  template <class T>
  T get() {
    T v;
    get_bytes(&v, sizeof(T));
    return v;
  }
  void get_bytes(void* out, std::size_t n) {
    if (n > size_ - pos_) throw CacheError("cache file is truncated");
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }
  [[nodiscard]] std::size_t remaining() const { return size_ - pos_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < n; off += kChunk)
    crc = crc32(crc, data + off, static_cast<uInt>(std::min(kChunk, n - off)));
  return static_cast<std::uint32_t>(crc);
}

void put_matrix(Writer& w, const DenseMatrix<double>& m) {
  w.put_bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

}  // namespace

KernelCache compress_kernels(const ToeplitzKernelSet& set, double tol) {
  if (set.dx() != 1.0) throw std::invalid_argument("compress_kernels: kernels must be at unit voxel edge");
  KernelCache cache;
  cache.tol = tol;
  cache.n_max = set.dims();
  for (const auto& b : all_blocks())
    cache.blocks[static_cast<int>(b.id)] = tucker_svd(set.block(b.id), tol);
  return cache;
}

KernelCache build_kernel_cache(Dims n_max, double tol) {
  return compress_kernels(assemble_toeplitz(n_max, 1.0), tol);
}

void cache_write(const KernelCache& cache, const std::filesystem::path& path) {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put(KernelCache::kVersion);
  w.put(cache.tol);
  for (int a = 0; a < 3; ++a) w.put(static_cast<std::uint64_t>(cache.n_max[a]));
  w.put(static_cast<std::uint32_t>(kNumBlocks));
  for (const auto& b : all_blocks()) {
    const auto& t = cache.blocks[static_cast<int>(b.id)];
    w.put_bytes(b.tag.data(), 2);
    const Dims r = t.ranks();
    for (int a = 0; a < 3; ++a) w.put(static_cast<std::uint64_t>(r[a]));
    for (const auto& f : t.factors) put_matrix(w, f);
    w.put_bytes(t.core.data(), sizeof(double) * t.core.size());
  }
  const std::uint32_t crc = crc_of(w.buffer().data(), w.buffer().size());
  w.put(crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CacheError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw CacheError("failed writing '" + path.string() + "'");
}

void cache_write(const ToeplitzKernelSet& set, double tol, const std::filesystem::path& path) {
  cache_write(compress_kernels(set, tol), path);
}

KernelCache cache_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot open cache '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 + 4 + 8 + 24 + 4 + 4) throw CacheError("cache file '" + path.string() + "' is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CacheError("'" + path.string() + "' is not an SVXT cache");

  const std::size_t payload = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + payload, 4);
  if (crc_of(bytes.data(), payload) != stored) throw CacheError("cache checksum mismatch in '" + path.string() + "'");

  Reader r(bytes.data() + 4, payload - 4);
  const auto version = r.get<std::uint32_t>();
  if (version != KernelCache::kVersion)
    throw CacheError("cache version mismatch: file has " + std::to_string(version) + ", expected " +
                     std::to_string(KernelCache::kVersion));
  KernelCache cache;
  cache.tol = r.get<double>();
  cache.n_max.x = static_cast<Index>(r.get<std::uint64_t>());
  cache.n_max.y = static_cast<Index>(r.get<std::uint64_t>());
  cache.n_max.z = static_cast<Index>(r.get<std::uint64_t>());
  if (cache.n_max.x < 1 || cache.n_max.y < 1 || cache.n_max.z < 1) throw CacheError("cache has invalid dimensions");
  const auto count = r.get<std::uint32_t>();
  if (count != static_cast<std::uint32_t>(kNumBlocks)) throw CacheError("cache has an unexpected block count");

  std::array<bool, kNumBlocks> seen{};
  for (std::uint32_t n = 0; n < count; ++n) {
    std::array<char, 2> tag{};
    r.get_bytes(tag.data(), 2);
    const BlockInfo* info = nullptr;
    for (const auto& b : all_blocks())
      if (b.tag == tag) info = &b;
    if (!info) throw CacheError("cache contains an unknown block tag");
    const int id = static_cast<int>(info->id);
    if (seen[id]) throw CacheError("cache contains a duplicate block");
    seen[id] = true;

    Dims rk;
    rk.x = static_cast<Index>(r.get<std::uint64_t>());
    rk.y = static_cast<Index>(r.get<std::uint64_t>());
    rk.z = static_cast<Index>(r.get<std::uint64_t>());
    for (int a = 0; a < 3; ++a)
      if (rk[a] < 1 || rk[a] > cache.n_max[a]) throw CacheError("cache block has invalid ranks");

    auto& t = cache.blocks[id];
    t.original = cache.n_max;
    t.tol = cache.tol;
    for (int a = 0; a < 3; ++a) {
      t.factors[a].resize(cache.n_max[a], rk[a]);
      r.get_bytes(t.factors[a].data(), sizeof(double) * static_cast<std::size_t>(t.factors[a].size()));
    }
    t.core = Array3<double>(rk);
    r.get_bytes(t.core.data(), sizeof(double) * t.core.size());
  }
  if (r.remaining() != 0) throw CacheError("cache has trailing bytes");
  return cache;
}

ToeplitzKernelSet restore_kernels(const KernelCache& cache, Dims dims, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("restore_kernels: dx must be positive");
  if (!dims.fits_in(cache.n_max))
    throw CacheError("cache too small: built for " + to_string(cache.n_max) + ", requested " + to_string(dims) +
                     "; rebuild it with a larger --nmax");
  ToeplitzKernelSet set(dims, 1.0);
  for (const auto& b : all_blocks()) set.block(b.id) = reconstruct_leading(cache.blocks[static_cast<int>(b.id)], dims);
  set.scale(std::pow(dx, 5), dx);
  return set;
}

ToeplitzKernelSet cache_read(const std::filesystem::path& path, Dims dims, double dx) {
  return restore_kernels(cache_load(path), dims, dx);
}

}  // namespace svx

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <cstdio>
#include <fstream>
#include <random>

#include <unistd.h>

#include <CLI11.hpp>

#include "report.hpp"
#include "svx/kernel_cache.hpp"
#include "svx/solve.hpp"

namespace svx::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return prefix.string() + suffix;
}

}  // namespace

int cmd_cache_build(const CacheBuildOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.nmax < 1) {
    err << "error: --nmax must be >= 1\n";
    return kConfigError;
  }
  if (!(opts.tol > 0.0)) {
    err << "error: --tol must be positive\n";
    return kConfigError;
  }
  try {
    const auto t0 = Clock::now();
    const KernelCache cache = build_kernel_cache({opts.nmax, opts.nmax, opts.nmax}, opts.tol);
    cache_write(cache, opts.out);
    out << "cache " << opts.out.string() << ": nmax " << opts.nmax << ", tol " << fmt12(opts.tol) << '\n';
    std::size_t dense = 0, stored = 0;
    for (const auto& b : all_blocks()) {
      const auto& t = cache.blocks[static_cast<int>(b.id)];
      dense += t.dense_size();
      stored += t.compressed_size();
      out << "  block " << b.tag[0] << b.tag[1] << ": ranks " << to_string(t.ranks()) << ", "
          << t.compressed_size() * sizeof(double) << " of " << t.dense_size() * sizeof(double) << " bytes\n";
    }
    out << "  total " << stored * sizeof(double) << " of " << dense * sizeof(double) << " bytes, "
        << fmt12(seconds_since(t0)) << " s\n";
    return kOk;
  } catch (const CacheError& e) {
    err << "error: " << e.what() << '\n';
    return kCacheError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err) {
  const auto t_start = Clock::now();
  ProjectConfig cfg;
  std::unique_ptr<VoxelGrid> grid;
  std::vector<PortSpec> ports;
  try {
    cfg = load_config(opts.config);
    if (!opts.freq_hz.empty()) {
      for (double f : opts.freq_hz)
        if (!(f > 0.0)) throw ConfigError("option '--freq': must be positive");
      cfg.frequencies_hz = opts.freq_hz;
    }
    if (opts.rre) {
      if (!(*opts.rre > 0.0 && *opts.rre < 1.0)) throw ConfigError("option '--rre': must be in (0, 1)");
      cfg.rre = *opts.rre;
    }
    if (opts.restart) {
      if (*opts.restart < 1) throw ConfigError("option '--restart': must be >= 1");
      cfg.restart = *opts.restart;
    }
    if (opts.tucker_tol) {
      if (!(*opts.tucker_tol > 0.0)) throw ConfigError("option '--tucker-tol': must be positive");
      cfg.tucker_tol = *opts.tucker_tol;
    }
    if (opts.schur) cfg.schur = *opts.schur;
    if (opts.schur_tol) {
      if (!(*opts.schur_tol > 0.0)) throw ConfigError("option '--schur-tol': must be positive");
      cfg.schur_tol = *opts.schur_tol;
    }
    if (opts.no_tucker) cfg.compress_circulants = false;
    if (opts.cache) cfg.cache = *opts.cache;
    grid = std::make_unique<VoxelGrid>(VoxelGrid::build(cfg.geometry));
    const NodeIndex nodes(*grid);
    ports = resolve_ports(cfg, *grid, nodes);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const GeometryError& e) {
    err << "config error: geometry: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    Timings tm;
    auto t0 = Clock::now();
    ToeplitzKernelSet set = cfg.cache ? cache_read(*cfg.cache, grid->dims(), grid->dx())
                                      : assemble_toeplitz(grid->dims(), grid->dx());
    tm.toeplitz_s = seconds_since(t0);

    t0 = Clock::now();
    const CirculantKernels kernels(std::move(set), {cfg.compress_circulants, cfg.tucker_tol});
    tm.circulant_s = seconds_since(t0);

    const Extraction ex(*grid, ports);
    SolveConfig sc;
    sc.rre = cfg.rre;
    sc.restart = cfg.restart;
    sc.max_iters = cfg.max_iters;
    sc.frequencies_hz = cfg.frequencies_hz;
    sc.schur.kind = cfg.schur;
    sc.schur.tol = cfg.schur_tol;
    const SolveReport rep = run_extraction(ex, kernels, sc);
    tm.total_s = seconds_since(t_start);

    const std::filesystem::path prefix = opts.out.empty() ? opts.config.stem() : opts.out;
    std::ostringstream csv, vtk;
    write_csv(csv, cfg, ports, rep);
    write_vtk(vtk, *grid, rep);
    write_file(with_suffix(prefix, ".csv"), csv.str());
    write_file(with_suffix(prefix, ".stats.json"), stats_json(cfg, *grid, kernels, rep).dump(2) + "\n");
    write_file(with_suffix(prefix, ".timings.json"), timings_json(tm, rep).dump(2) + "\n");
    write_file(with_suffix(prefix, ".vtk"), vtk.str());
    out << csv.str();
    if (!rep.converged()) {
      err << "error: GMRES did not reach rre " << fmt12(cfg.rre) << " within " << cfg.max_iters
          << " iterations; partial report written\n";
      return kNotConverged;
    }
    return kOk;
  } catch (const CacheError& e) {
    err << "cache error: " << e.what() << '\n';
    return kCacheError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const GeometryError& e) {
    err << "config error: geometry: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

int cmd_verify(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  ProjectConfig cfg;
  std::unique_ptr<VoxelGrid> grid;
  std::vector<PortSpec> ports;
  try {
    cfg = load_config(config);
    grid = std::make_unique<VoxelGrid>(VoxelGrid::build(cfg.geometry));
    if (grid->cell_count() > 64) throw ConfigError("geometry.domain: verify needs at most 64 lattice cells");
    const NodeIndex nodes(*grid);
    ports = resolve_ports(cfg, *grid, nodes);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const GeometryError& e) {
    err << "config error: geometry: " << e.what() << '\n';
    return kConfigError;
  }

  bool all = true;
  auto report = [&](const char* name, bool ok, double value, double limit) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << fmt12(value) << " (limit " << fmt12(limit) << ")\n";
    all = all && ok;
  };
  try {
    const Dims dims = grid->dims();
    const double dx = grid->dx();
    const double omega = 2.0 * std::numbers::pi * cfg.frequencies_hz.front();
    const ToeplitzKernelSet unit = assemble_toeplitz(dims, 1.0);
    const ToeplitzKernelSet set = assemble_toeplitz(dims, dx);

    {
      const CirculantKernels kernels(set);
      const CirculantOperator op(kernels, *grid, omega);
      const DenseMatrix<cplx> Z = assemble_dense_Z(set, *grid, omega);
      std::mt19937_64 rng(7);
      std::normal_distribution<double> nd;
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        Eigen::VectorXcd x(op.current_size());
        for (auto& v : x) v = {nd(rng), nd(rng)};
        const auto y = op.apply_Z(std::span<const cplx>(x.data(), static_cast<std::size_t>(x.size())));
        const Eigen::VectorXcd yd = Z * x;
        const double e = (Eigen::Map<const Eigen::VectorXcd>(y.data(), yd.size()) - yd).norm() / yd.norm();
        worst = std::max(worst, e);
      }
      report("fft matvec vs dense", worst <= 1e-12, worst, 1e-12);
      const double sym = (Z - Z.transpose()).norm() / Z.norm();
      report("dense Z complex symmetry", sym <= 1e-12, sym, 1e-12);
    }

    {
      const double f = std::pow(dx, 5);
      double worst = 0.0;
      for (const auto& b : all_blocks()) {
        Array3<double> scaled = unit.block(b.id);
        scaled *= f;
        if (scaled.frobenius_norm() > 0.0) worst = std::max(worst, relative_frobenius(set.block(b.id), scaled));
      }
      report("dx^5 scaling law", worst <= 1e-10, worst, 1e-10);
    }

    {
      const double tol = 1e-8;
      double worst = 0.0;
      for (const auto& b : all_blocks()) {
        const auto& blk = unit.block(b.id);
        if (blk.frobenius_norm() == 0.0) continue;
        worst = std::max(worst, relative_frobenius(reconstruct(tucker_svd(blk, tol)), blk));
      }
      report("tucker round trip", worst <= tol, worst, tol);

      const auto path = std::filesystem::temp_directory_path() /
                        ("svx-verify-" + std::to_string(static_cast<long>(::getpid())) + ".svxt");
      cache_write(unit, tol, path);
      const ToeplitzKernelSet back = cache_read(path, dims, dx);
      std::filesystem::remove(path);
      double cworst = 0.0;
      for (const auto& b : all_blocks())
        if (set.block(b.id).frobenius_norm() > 0.0)
          cworst = std::max(cworst, relative_frobenius(back.block(b.id), set.block(b.id)));
      report("cache round trip", cworst <= 10 * tol, cworst, 10 * tol);
    }

    {
      const Extraction ex(*grid, ports);
      const CirculantKernels kernels(set);
      const CirculantOperator op(kernels, *grid, omega);
      std::mt19937_64 rng(11);
      std::normal_distribution<double> nd;
      for (SchurKind kind : {SchurKind::Direct, SchurKind::AmgCg}) {
        SchurOptions so;
        so.kind = kind;
        const auto pc = SchurPreconditioner::from_operator(op, ex.reduced().free, so);
        std::vector<cplx> v(static_cast<std::size_t>(ex.system_size())), qv(v.size()), back(v.size());
        for (auto& x : v) x = {nd(rng), nd(rng)};
        pc.apply_q(v, qv);
        pc.apply(qv, back);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          num += std::norm(back[i] - v[i]);
          den += std::norm(v[i]);
        }
        const double e = std::sqrt(num / den);
        report(kind == SchurKind::Direct ? "preconditioner round trip (direct)" : "preconditioner round trip (amg)",
               e <= 1e-6, e, 1e-6);
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return all ? kOk : kFailure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inductance extraction for voxelized superconducting structures"};
  app.require_subcommand(1);

  CacheBuildOptions cb;
  auto* cache_cmd = app.add_subcommand("cache-build", "Precompute Tucker-compressed unit kernels");
  cache_cmd->add_option("--nmax", cb.nmax, "Voxels per axis of the cached domain")->capture_default_str();
  cache_cmd->add_option("--tol", cb.tol, "Tucker truncation tolerance")->capture_default_str();
  cache_cmd->add_option("--out", cb.out, "Cache file to write")->required();

  SolveOptions so;
  double rre = 0.0, tucker_tol = 0.0, schur_tol = 0.0;
  int restart = 0;
  std::string schur;
  std::string cache_path;
  std::string out_prefix;
  auto* solve_cmd = app.add_subcommand("solve", "Extract port inductances");
  solve_cmd->add_option("config", so.config, "Project config JSON")->required();
  solve_cmd->add_option("--freq", so.freq_hz, "Frequency in Hz (repeatable)");
  auto* o_rre = solve_cmd->add_option("--rre", rre, "GMRES relative residual target (default 1e-8)");
  auto* o_restart = solve_cmd->add_option("--restart", restart, "GMRES restart length (default 50)");
  auto* o_ttol = solve_cmd->add_option("--tucker-tol", tucker_tol, "Circulant Tucker tolerance (default 1e-8)");
  auto* o_schur = solve_cmd->add_option("--schur", schur, "Schur solver: direct or amg (default amg)")
                      ->check(CLI::IsMember({"direct", "amg"}));
  auto* o_stol = solve_cmd->add_option("--schur-tol", schur_tol, "Schur solve tolerance (default 1e-8)");
  solve_cmd->add_flag("--no-tucker", so.no_tucker, "Keep circulant tensors uncompressed");
  auto* o_cache = solve_cmd->add_option("--cache", cache_path, "Kernel cache file");
  solve_cmd->add_option("--out", out_prefix, "Output prefix");

  std::filesystem::path verify_cfg;
  auto* verify_cmd = app.add_subcommand("verify", "Dense-oracle checks on a tiny grid");
  verify_cmd->add_option("config", verify_cfg, "Project config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kOk : kConfigError;
  }

  if (*cache_cmd) return cmd_cache_build(cb, out, err);
  if (*solve_cmd) {
    if (*o_rre) so.rre = rre;
    if (*o_restart) so.restart = restart;
    if (*o_ttol) so.tucker_tol = tucker_tol;
    if (*o_schur) so.schur = schur == "direct" ? SchurKind::Direct : SchurKind::AmgCg;
    if (*o_stol) so.schur_tol = schur_tol;
    if (*o_cache) so.cache = cache_path;
    so.out = out_prefix;
    return cmd_solve(so, out, err);
  }
  return cmd_verify(verify_cfg, out, err);
}

}  // namespace svx::cli

#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace svx::cli {

using nlohmann::json;

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(fmt12(v).c_str(), nullptr);
}

namespace {

json rounded_matrix(const DenseMatrix<double>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(round12(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_csv(std::ostream& out, const ProjectConfig& cfg, const std::vector<PortSpec>& ports,
               const SolveReport& rep) {
  out << "port,freq_hz,L_H,R_ohm,iterations,converged,err_vs_reference,L_per_length_H_per_m\n";
  for (const auto& fr : rep.frequencies) {
    for (std::size_t p = 0; p < ports.size(); ++p) {
      const double L = fr.inductance(static_cast<Index>(p), static_cast<Index>(p));
      const double R = fr.resistance(static_cast<Index>(p), static_cast<Index>(p));
      out << ports[p].name << ',' << fmt12(fr.freq_hz) << ',' << fmt12(L) << ',' << fmt12(R) << ','
          << fr.solves[p].iterations << ',' << (fr.solves[p].converged ? "true" : "false") << ',';
      for (const auto& [name, ref] : cfg.reference_inductance)
        if (name == ports[p].name && L != 0.0) out << fmt12(relative_difference(L, ref));
      out << ',';
      if (ports[p].length_m > 0.0) out << fmt12(L / ports[p].length_m);
      out << '\n';
    }
  }
}

json stats_json(const ProjectConfig& cfg, const VoxelGrid& grid, const CirculantKernels& kernels,
                const SolveReport& rep) {
  json j;
  const Dims d = grid.dims();
  j["grid"] = {{"domain", {d.x, d.y, d.z}},
               {"dx_m", round12(grid.dx())},
               {"voxels", rep.voxels},
               {"cells", grid.cell_count()},
               {"nodes", rep.nodes},
               {"unknowns", rep.unknowns},
               {"system_size", rep.system_size}};

  const auto& cs = kernels.stats();
  json ranks = json::object();
  for (const auto& b : all_blocks()) {
    const Dims r = cs.ranks[static_cast<int>(b.id)];
    ranks[std::string(b.tag.begin(), b.tag.end())] = {r.x, r.y, r.z};
  }
  j["compression"] = {{"enabled", kernels.compressed()},
                      {"tol", round12(cfg.tucker_tol)},
                      {"dense_bytes", cs.dense_bytes},
                      {"stored_bytes", cs.stored_bytes},
                      {"CR", round12(cs.ratio())},
                      {"ranks", ranks}};
  j["memory"] = {{"circulant_bytes", cs.resident_bytes},
                 {"schur_solver", to_string(cfg.schur)},
                 {"schur_solver_bytes", rep.schur_memory_bytes}};
  j["solver"] = {{"rre", round12(cfg.rre)},
                 {"restart", cfg.restart},
                 {"max_iters", cfg.max_iters},
                 {"schur_tol", round12(cfg.schur_tol)},
                 {"schur_solves", rep.schur_solves},
                 {"schur_cg_iterations", rep.schur_cg_iterations},
                 {"matvecs", rep.matvecs}};

  json freqs = json::array();
  for (const auto& fr : rep.frequencies) {
    json f;
    f["freq_hz"] = round12(fr.freq_hz);
    f["inductance_H"] = rounded_matrix(fr.inductance);
    f["resistance_ohm"] = rounded_matrix(fr.resistance);
    json solves = json::array();
    for (const auto& s : fr.solves) {
      json h = json::array();
      for (double v : s.history) h.push_back(round12(v));
      solves.push_back({{"port", s.port},
                        {"iterations", s.iterations},
                        {"converged", s.converged},
                        {"relative_residual", round12(s.relative_residual)},
                        {"conservation_residual", round12(s.conservation)},
                        {"residual_history", h}});
    }
    f["solves"] = solves;
    freqs.push_back(std::move(f));
  }
  j["results"] = freqs;
  j["converged"] = rep.converged();
  return j;
}

json timings_json(const Timings& t, const SolveReport& rep) {
  const double conv = rep.matvec_seconds - rep.restore_seconds;
  return {{"toeplitz_s", t.toeplitz_s},
          {"circulant_s", t.circulant_s},
          {"precond_setup_s", rep.precond_seconds},
          {"iterative_solution_s", rep.solve_seconds},
          {"matvec_s", rep.matvec_seconds},
          {"circulant_restore_s", rep.restore_seconds},
          {"CO", conv > 0.0 ? rep.restore_seconds / conv : 0.0},
          {"total_s", t.total_s}};
}

void write_vtk(std::ostream& out, const VoxelGrid& grid, const SolveReport& rep) {
  const Dims d = grid.dims();
  out << "# vtk DataFile Version 3.0\n"
      << "current density\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << d.x + 1 << ' ' << d.y + 1 << ' ' << d.z + 1 << '\n'
      << "ORIGIN 0 0 0\n"
      << "SPACING " << fmt12(grid.dx()) << ' ' << fmt12(grid.dx()) << ' ' << fmt12(grid.dx()) << '\n'
      << "CELL_DATA " << d.total() << '\n'
      << "SCALARS current_density_magnitude double 1\n"
      << "LOOKUP_TABLE default\n";
  const auto& J = rep.current_density;
  for (Index k = 0; k < d.z; ++k)
    for (Index j = 0; j < d.y; ++j)
      for (Index i = 0; i < d.x; ++i) {
        const Index v = grid.voxel_at(i, j, k);
        double m = 0.0;
        if (v >= 0 && !J.empty()) m = std::sqrt(std::norm(J[v][0]) + std::norm(J[v][1]) + std::norm(J[v][2]));
        out << fmt12(m) << '\n';
      }
  out << "VECTORS current_density_real double\n";
  for (Index k = 0; k < d.z; ++k)
    for (Index j = 0; j < d.y; ++j)
      for (Index i = 0; i < d.x; ++i) {
        const Index v = grid.voxel_at(i, j, k);
        if (v >= 0 && !J.empty())
          out << fmt12(J[v][0].real()) << ' ' << fmt12(J[v][1].real()) << ' ' << fmt12(J[v][2].real()) << '\n';
        else
          out << "0 0 0\n";
      }
}

}  // namespace svx::cli

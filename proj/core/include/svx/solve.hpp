#pragma once

#include <span>
#include <string>
#include <vector>

#include "svx/gmres.hpp"
#include "svx/opfft.hpp"
#include "svx/precond.hpp"
#include "svx/voxgrid.hpp"

namespace svx {

struct SolveConfig {
  double rre = 1e-8;
  int restart = 50;
  int max_iters = 3000;
  std::vector<double> frequencies_hz{1e9};
  SchurOptions schur{};
  /// Off: plain GMRES, used to measure what the preconditioner buys.
  bool precondition = true;
  double mu = kMu0;
};

/// Frequency-independent setup: nodes, incidence and the reduced incidence
/// after eliminating every port terminal node plus one reference node per
/// conductor that touches no terminal.
class Extraction {
 public:
  Extraction(const VoxelGrid& grid, std::vector<PortSpec> ports);

  [[nodiscard]] const VoxelGrid& grid() const noexcept { return *grid_; }
  [[nodiscard]] const NodeIndex& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const IncidenceMatrix& incidence() const noexcept { return inc_; }
  [[nodiscard]] const ReducedIncidence& reduced() const noexcept { return red_; }
  [[nodiscard]] const std::vector<PortSpec>& ports() const noexcept { return ports_; }
  [[nodiscard]] const std::vector<Index>& floating_references() const noexcept { return floating_; }

  [[nodiscard]] Index current_size() const noexcept { return kNumBases * grid_->voxel_count(); }
  /// 5K plus the number of free nodes.
  [[nodiscard]] Index system_size() const noexcept { return current_size() + red_.free.rows(); }

  /// [V; 0] for a unit potential difference between the + terminal of `port`
  /// (+1/2) and every other terminal node (-1/2).
  [[nodiscard]] std::vector<cplx> build_excitation(std::size_t port) const;
  /// Same drive with the + and - terminals of `port` exchanged.
  [[nodiscard]] std::vector<cplx> build_excitation_swapped(std::size_t port) const;

  /// Current entering the conductor through the + terminal faces of `port`.
  [[nodiscard]] cplx port_current(std::size_t port, std::span<const cplx> solution) const;

  /// ||A_free I|| / ||I|| for the current block of a solution.
  [[nodiscard]] double conservation_residual(std::span<const cplx> solution) const;

 private:
  std::vector<cplx> excitation(const std::vector<double>& terminal_potential) const;

  const VoxelGrid* grid_;
  NodeIndex nodes_;
  IncidenceMatrix inc_;
  std::vector<PortSpec> ports_;
  std::vector<Index> floating_;
  ReducedIncidence red_;
};

struct PortSolve {
  std::string port;
  double freq_hz = 0.0;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  double conservation = 0.0;
  std::vector<double> history;
};

struct FrequencyResult {
  double freq_hz = 0.0;
  /// Port impedance matrix Z = Y^{-1}; L = Im(Z)/w, R = Re(Z).
  DenseMatrix<cplx> impedance;
  DenseMatrix<double> inductance;
  DenseMatrix<double> resistance;
  std::vector<PortSolve> solves;
};

struct SolveReport {
  std::vector<FrequencyResult> frequencies;
  /// Per-voxel current density (A/m^2, complex vector) for the first port
  /// drive at the first frequency.
  std::vector<std::array<cplx, 3>> current_density;
  Index voxels = 0;
  Index nodes = 0;
  Index unknowns = 0;  ///< 5K + M
  Index system_size = 0;
  std::size_t schur_memory_bytes = 0;
  long schur_solves = 0;
  long schur_cg_iterations = 0;
  double precond_seconds = 0.0;
  double solve_seconds = 0.0;
  double matvec_seconds = 0.0;
  double restore_seconds = 0.0;
  long matvecs = 0;
  [[nodiscard]] bool converged() const noexcept;
};

/// L = Im(Z)/w and R = Re(Z) of a port impedance.
struct InductanceResistance {
  double L = 0.0;
  double R = 0.0;
};
[[nodiscard]] InductanceResistance extract_inductance(cplx impedance, double omega);
/// Zp = V / I for a unit drive; throws Error when |I| is below the open-port floor.
[[nodiscard]] cplx port_impedance(cplx port_current, cplx port_voltage = 1.0);

/// |a - b| / |a|.
[[nodiscard]] double relative_difference(double a, double b);

/// Solves every port drive at every frequency.
[[nodiscard]] SolveReport run_extraction(const Extraction& ex, const CirculantKernels& kernels, const SolveConfig& cfg);

/// Left-preconditioned GMRES for one right-hand side at one frequency.
[[nodiscard]] GmresResult solve_system(const Extraction& ex, const CirculantOperator& op,
                                       const SchurPreconditioner* pc, std::span<const cplx> rhs,
                                       std::span<cplx> solution, const GmresOptions& opts);

}  // namespace svx

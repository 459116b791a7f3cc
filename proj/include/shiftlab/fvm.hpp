#ifndef SHIFTLAB_FVM_HPP
#define SHIFTLAB_FVM_HPP

#include "shiftlab/models.hpp"
#include "shiftlab/riemann.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shiftlab {

struct Grid1D {
  double x_min = -2.0;
  double x_max = 2.0;
  int N = 2000;
  double cfl = 0.45;

  double dx() const { return (x_max - x_min) / N; }
  double center(int j) const { return x_min + (j + 0.5) * dx(); }
  /// Index of the cell containing x (may be out of range).
  long cell_of(double x) const;
  /// Throws PreconditionError unless N >= 16, cfl in (0, 0.9], x_min < x_max.
  void validate() const;

  bool operator==(const Grid1D&) const = default;
};

enum class Scheme { rusanov, godunov_exact };

const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

using InitialData = std::function<State(double)>;

enum class ProfileKind { sine, bump, noise };

struct Profile {
  ProfileKind kind = ProfileKind::bump;
  std::uint64_t seed = 0;  // noise only
};

const char* to_string(ProfileKind k);
ProfileKind parse_profile(const std::string& s);

/// phi(x), supported in [-1, 1].
double profile_value(const Profile& p, double x);

/// Unit direction of the perturbation: (1, ..., 1) / sqrt(n).
State perturbation_direction(int n);

/// x -> (uL if x <= 0 else uR) + eps * phi(x) * w. Checks admissibility on a
/// fine grid of [-1, 1]; DomainError names the offending x.
InitialData perturb_riemann_data(const SystemModel& model, const State& uL, const State& uR,
                                 double eps, const Profile& profile);

struct SimulationOptions {
  Scheme scheme = Scheme::rusanov;
  int snapshot_stride = 1;
  /// -1 turns the Rusanov diffusion into anti-diffusion (failure control only).
  double diffusion_sign = 1.0;
};

struct Trajectory {
  ModelPtr model;
  Grid1D grid;
  SimulationOptions options;
  std::vector<double> times;
  std::vector<StateList> snapshots;
  /// Per stored interval k -> k+1: integral of the left and right boundary fluxes.
  StateList left_boundary_flux;
  StateList right_boundary_flux;
  /// Per stored interval: the step sizes taken (a single entry when stride is 1).
  std::vector<std::vector<double>> step_dts;

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
};

/// Explicit time stepping to t_end with dt = cfl dx / max|lambda|, outflow boundaries.
Trajectory simulate(ModelPtr model, const InitialData& data, const Grid1D& grid, double t_end,
                    const SimulationOptions& options = {});

/// Cell averages of the data by 4-point Gauss quadrature.
StateList cell_averages(const SystemModel& model, const InitialData& data, const Grid1D& grid);

struct EntropyResidualReport {
  double max_excess = 0.0;
  std::size_t worst_step = 0;
  long worst_cell = -1;
  bool pass = false;
};

/// Discrete entropy balance per cell and step with the scheme's entropy flux.
EntropyResidualReport entropy_residual(const Trajectory& traj);

/// max over stored intervals of |sum(u^{k+1} - u^k) dx + boundary flux integral|_inf.
double conservation_defect(const Trajectory& traj);

/// L1 distance of snapshot k to the exact solution.
double l1_error(const Trajectory& traj, std::size_t k, const RiemannSolution& exact);

enum class Side { left, right };

/// Cells skipped beyond the cell containing the path, per side.
struct TraceOffsets {
  int left = 1;
  int right = 1;
};

inline constexpr int kMaxTraceOffset = 64;

struct TraceSeries {
  std::vector<double> times;
  std::vector<double> positions;
  StateList left_states;
  StateList right_states;
  TraceOffsets offsets;
  /// max over t and sides of the spread among offsets {o, o+1, o+2}
  double offset_spread = 0.0;
};

/// One-sided traces along a path sampled at the trajectory times: the cell
/// average `offset` cells beyond the cell containing h(t). TraceError if the
/// path comes within (max offset + 3) dx of the domain edge.
TraceSeries trace_at(const Trajectory& traj, const std::vector<double>& h, TraceOffsets offsets);
TraceSeries trace_at(const Trajectory& traj, const std::vector<double>& h, int offset = 1);

/// Single-sided convenience.
StateList trace_side(const Trajectory& traj, const std::vector<double>& h, Side side,
                     int offset = 1);

/// Smallest offset whose trace stays within rel_tol of `target` (relative to
/// |target|) at every stored time >= t_settle. Meant for unperturbed runs where
/// the exact one-sided state is known. TraceError if no offset up to
/// kMaxTraceOffset qualifies.
int calibrate_trace_offset(const Trajectory& traj, const std::vector<double>& h, Side side,
                           const State& target, double rel_tol, double t_settle);

/// Numerical flux and numerical entropy flux at an interface.
struct InterfaceFlux {
  State F;
  double Q;
};

InterfaceFlux numerical_flux(const SystemModel& model, const State& uL, const State& uR,
                             Scheme scheme, double diffusion_sign = 1.0);

}  // namespace shiftlab

#endif

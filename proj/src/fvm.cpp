#include "shiftlab/fvm.hpp"

#include "shiftlab/errors.hpp"
#include "shiftlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace shiftlab {

long Grid1D::cell_of(double x) const {
  return static_cast<long>(std::floor((x - x_min) / dx()));
}

void Grid1D::validate() const {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw PreconditionError("grid: need finite x_min < x_max");
  }
  if (N < 16) throw PreconditionError("grid: N must be >= 16");
  if (!(cfl > 0.0 && cfl <= 0.9)) throw PreconditionError("grid: cfl must lie in (0, 0.9]");
}

const char* to_string(Scheme s) {
  return s == Scheme::rusanov ? "rusanov" : "godunov_exact";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "rusanov") return Scheme::rusanov;
  if (s == "godunov_exact") return Scheme::godunov_exact;
  throw ConfigError("unknown scheme '" + s + "' (expected rusanov or godunov_exact)");
}

const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::sine: return "sine";
    case ProfileKind::bump: return "bump";
    case ProfileKind::noise: return "noise";
  }
  return "bump";
}

ProfileKind parse_profile(const std::string& s) {
  if (s == "sine") return ProfileKind::sine;
  if (s == "bump") return ProfileKind::bump;
  if (s == "noise") return ProfileKind::noise;
  throw ConfigError("unknown profile '" + s + "' (expected sine, bump or noise)");
}

namespace {

constexpr int kNoisePieces = 64;

std::vector<double> noise_values(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(kNoisePieces);
  for (auto& x : v) x = d(rng);
  return v;
}

double profile_with(const Profile& p, const std::vector<double>& noise, double x) {
  if (!(x > -1.0 && x < 1.0)) return 0.0;
  switch (p.kind) {
    case ProfileKind::sine: return std::sin(std::numbers::pi * x);
    case ProfileKind::bump: return std::exp(1.0 - 1.0 / (1.0 - x * x));
    case ProfileKind::noise: {
      const int k = std::min(kNoisePieces - 1, static_cast<int>((x + 1.0) * 0.5 * kNoisePieces));
      return noise[static_cast<std::size_t>(k)];
    }
  }
  return 0.0;
}

}  // namespace

double profile_value(const Profile& p, double x) {
  const std::vector<double> noise = p.kind == ProfileKind::noise ? noise_values(p.seed)
                                                                  : std::vector<double>{};
  return profile_with(p, noise, x);
}

State perturbation_direction(int n) { return State::Ones(n) / std::sqrt(static_cast<double>(n)); }

InitialData perturb_riemann_data(const SystemModel& model, const State& uL, const State& uR,
                                 double eps, const Profile& profile) {
  model.require_admissible(uL, "perturb_riemann_data (left)");
  model.require_admissible(uR, "perturb_riemann_data (right)");
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw PreconditionError("perturb_riemann_data: eps must be finite and >= 0");
  }
  const State w = perturbation_direction(model.n());
  const std::vector<double> noise = profile.kind == ProfileKind::noise
                                        ? noise_values(profile.seed)
                                        : std::vector<double>{};
  const Profile prof = profile;
  InitialData data = [=](double x) -> State {
    const State& base = x <= 0.0 ? uL : uR;
    if (eps == 0.0) return base;
    return base + eps * profile_with(prof, noise, x) * w;
  };
  if (eps > 0.0) {
    const int samples = 8000;
    for (int i = 0; i <= samples; ++i) {
      const double x = -1.0 + 2.0 * i / samples;
      for (double xx : {x, std::nextafter(x, 2.0)}) {
        if (!model.is_admissible(data(xx))) {
          throw DomainError("perturb_riemann_data: perturbed state inadmissible at x = " +
                            std::to_string(xx));
        }
      }
    }
  }
  return data;
}

StateList cell_averages(const SystemModel& model, const InitialData& data, const Grid1D& grid) {
  const GaussRule& g = gauss_legendre(4);
  const double dx = grid.dx();
  StateList out(static_cast<std::size_t>(grid.N));
  for (int j = 0; j < grid.N; ++j) {
    const double a = grid.x_min + j * dx;
    State acc = State::Zero(model.n());
    for (std::size_t q = 0; q < g.nodes.size(); ++q) acc += g.weights[q] * data(a + g.nodes[q] * dx);
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

InterfaceFlux numerical_flux(const SystemModel& model, const State& uL, const State& uR,
                             Scheme scheme, double diffusion_sign) {
  if (scheme == Scheme::godunov_exact) {
    if (uL == uR) return {model.flux(uL), model.entropy_flux(uL)};
    const ModelPtr alias(&model, [](const SystemModel*) {});
    const RiemannSolution sol = solve_riemann(alias, uL, uR);
    const State u0 = evaluate(sol, 0.0, 1.0);
    return {model.flux(u0), model.entropy_flux(u0)};
  }
  const double a = std::max(model.char_speeds(uL).cwiseAbs().maxCoeff(),
                            model.char_speeds(uR).cwiseAbs().maxCoeff());
  const double d = 0.5 * a * diffusion_sign;
  return {0.5 * (model.flux(uL) + model.flux(uR)) - d * (uR - uL),
          0.5 * (model.entropy_flux(uL) + model.entropy_flux(uR)) -
              d * (model.entropy(uR) - model.entropy(uL))};
}

Trajectory simulate(ModelPtr model, const InitialData& data, const Grid1D& grid, double t_end,
                    const SimulationOptions& options) {
  if (!model) throw PreconditionError("simulate: null model");
  grid.validate();
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw PreconditionError("simulate: t_end must be > 0");
  if (options.snapshot_stride < 1) throw PreconditionError("simulate: stride must be >= 1");
  const SystemModel& m = *model;
  const int N = grid.N;
  const double dx = grid.dx();

  Trajectory tr;
  tr.model = model;
  tr.grid = grid;
  tr.options = options;
  StateList u = cell_averages(m, data, grid);
  for (int j = 0; j < N; ++j) {
    if (auto why = m.admissibility_violation(u[static_cast<std::size_t>(j)])) {
      throw SimulationError("simulate: initial cell average inadmissible (" + *why + ")", 0.0, j);
    }
  }
  tr.times.push_back(0.0);
  tr.snapshots.push_back(u);

  StateList F(static_cast<std::size_t>(N + 1));
  StateList unew(static_cast<std::size_t>(N));
  State acc_left = State::Zero(m.n()), acc_right = State::Zero(m.n());
  std::vector<double> acc_dts;
  double t = 0.0;
  int since_store = 0;
  while (t < t_end) {
    double smax = 0.0;
    for (int j = 0; j < N; ++j) {
      const double s = m.char_speeds(u[static_cast<std::size_t>(j)]).cwiseAbs().maxCoeff();
      if (!std::isfinite(s)) throw SimulationError("simulate: non-finite wave speed", t, j);
      smax = std::max(smax, s);
    }
    double dt = smax > 0.0 ? grid.cfl * dx / smax : t_end - t;
    bool last = false;
    if (t + dt >= t_end) {
      dt = t_end - t;
      last = true;
    }
    for (int i = 0; i <= N; ++i) {
      const State& a = u[static_cast<std::size_t>(std::max(i - 1, 0))];
      const State& b = u[static_cast<std::size_t>(std::min(i, N - 1))];
      F[static_cast<std::size_t>(i)] =
          numerical_flux(m, a, b, options.scheme, options.diffusion_sign).F;
    }
    const double r = dt / dx;
    for (int j = 0; j < N; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      unew[jj] = u[jj] - r * (F[jj + 1] - F[jj]);
      if (auto why = m.admissibility_violation(unew[jj])) {
        throw SimulationError("simulate: admissibility lost (" + *why + ") at t = " +
                                  std::to_string(t + dt) + ", cell " + std::to_string(j),
                              t + dt, j);
      }
    }
    u.swap(unew);
    t = last ? t_end : t + dt;
    acc_left += dt * F.front();
    acc_right += dt * F.back();
    acc_dts.push_back(dt);
    if (++since_store == options.snapshot_stride || last) {
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
      tr.left_boundary_flux.push_back(acc_left);
      tr.right_boundary_flux.push_back(acc_right);
      tr.step_dts.push_back(acc_dts);
      acc_left.setZero();
      acc_right.setZero();
      acc_dts.clear();
      since_store = 0;
    }
  }
  return tr;
}

EntropyResidualReport entropy_residual(const Trajectory& traj) {
  if (traj.snapshots.size() < 2) throw PreconditionError("entropy_residual: need >= 2 snapshots");
  if (traj.options.snapshot_stride != 1) {
    throw PreconditionError("entropy_residual: needs every step stored (stride 1)");
  }
  const SystemModel& m = *traj.model;
  const int N = traj.grid.N;
  const double dx = traj.grid.dx();
  EntropyResidualReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  std::vector<double> Q(static_cast<std::size_t>(N + 1));
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const StateList& u = traj.snapshots[k];
    const StateList& v = traj.snapshots[k + 1];
    const double dt = traj.times[k + 1] - traj.times[k];
    for (int i = 0; i <= N; ++i) {
      const State& a = u[static_cast<std::size_t>(std::max(i - 1, 0))];
      const State& b = u[static_cast<std::size_t>(std::min(i, N - 1))];
      Q[static_cast<std::size_t>(i)] =
          numerical_flux(m, a, b, traj.options.scheme, traj.options.diffusion_sign).Q;
    }
    for (int j = 0; j < N; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const double res = (m.entropy(v[jj]) - m.entropy(u[jj])) / dt + (Q[jj + 1] - Q[jj]) / dx;
      if (res > rep.max_excess) {
        rep.max_excess = res;
        rep.worst_step = k;
        rep.worst_cell = j;
      }
    }
  }
  rep.pass = rep.max_excess <= 1e-10;
  return rep;
}

double conservation_defect(const Trajectory& traj) {
  const double dx = traj.grid.dx();
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    State change = State::Zero(traj.model->n());
    for (std::size_t j = 0; j < traj.snapshots[k].size(); ++j) {
      change += (traj.snapshots[k + 1][j] - traj.snapshots[k][j]) * dx;
    }
    const State defect = change + traj.right_boundary_flux[k] - traj.left_boundary_flux[k];
    worst = std::max(worst, defect.cwiseAbs().maxCoeff());
  }
  return worst;
}

double l1_error(const Trajectory& traj, std::size_t k, const RiemannSolution& exact) {
  const double t = traj.times.at(k);
  const Grid1D& g = traj.grid;
  const GaussRule& rule = gauss_legendre(4);
  double err = 0.0;
  for (int j = 0; j < g.N; ++j) {
    const double a = g.x_min + j * g.dx();
    State avg = State::Zero(traj.model->n());
    if (t > 0.0) {
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        avg += rule.weights[q] * evaluate(exact, a + rule.nodes[q] * g.dx(), t);
      }
    } else {
      avg = exact.states.front();
      if (g.center(j) > 0.0) avg = exact.states.back();
    }
    err += (traj.snapshots[k][static_cast<std::size_t>(j)] - avg).lpNorm<1>() * g.dx();
  }
  return err;
}

namespace {

void check_path(const Trajectory& traj, const std::vector<double>& h, int max_offset) {
  if (h.size() != traj.times.size()) {
    throw PreconditionError("trace_at: path must be sampled at the trajectory times");
  }
  const Grid1D& g = traj.grid;
  const double margin = (max_offset + 3) * g.dx();
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] - g.x_min >= margin && g.x_max - h[k] >= margin)) {
      throw TraceError("trace_at: path at t = " + std::to_string(traj.times[k]) +
                       " is too close to the domain edge (h = " + std::to_string(h[k]) + ")");
    }
  }
}

const State& cell_state(const Trajectory& traj, std::size_t k, long j) {
  const long N = traj.grid.N;
  return traj.snapshots[k][static_cast<std::size_t>(std::clamp(j, 0L, N - 1))];
}

void check_offset(int o) {
  if (o < 1 || o > kMaxTraceOffset) {
    throw PreconditionError("trace_at: offset must be in [1, " + std::to_string(kMaxTraceOffset) +
                            "]");
  }
}

}  // namespace

TraceSeries trace_at(const Trajectory& traj, const std::vector<double>& h, TraceOffsets offsets) {
  check_offset(offsets.left);
  check_offset(offsets.right);
  check_path(traj, h, std::max(offsets.left, offsets.right));
  TraceSeries ts;
  ts.offsets = offsets;
  ts.times = traj.times;
  ts.positions = h;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const long j = traj.grid.cell_of(h[k]);
    ts.left_states.push_back(cell_state(traj, k, j - offsets.left));
    ts.right_states.push_back(cell_state(traj, k, j + offsets.right));
    double spread = 0.0;
    for (int a = 0; a <= 2; ++a) {
      for (int b = a + 1; b <= 2; ++b) {
        const long la = j - offsets.left - a, lb = j - offsets.left - b;
        const long ra = j + offsets.right + a, rb = j + offsets.right + b;
        spread = std::max(spread, (cell_state(traj, k, la) - cell_state(traj, k, lb)).norm());
        spread = std::max(spread, (cell_state(traj, k, ra) - cell_state(traj, k, rb)).norm());
      }
    }
    ts.offset_spread = std::max(ts.offset_spread, spread);
  }
  return ts;
}

TraceSeries trace_at(const Trajectory& traj, const std::vector<double>& h, int offset) {
  return trace_at(traj, h, TraceOffsets{offset, offset});
}

StateList trace_side(const Trajectory& traj, const std::vector<double>& h, Side side, int offset) {
  TraceSeries ts = trace_at(traj, h, offset);
  return side == Side::left ? ts.left_states : ts.right_states;
}

int calibrate_trace_offset(const Trajectory& traj, const std::vector<double>& h, Side side,
                           const State& target, double rel_tol, double t_settle) {
  if (h.size() != traj.times.size()) {
    throw PreconditionError("calibrate_trace_offset: path must be sampled at the trajectory times");
  }
  const double scale = std::max(target.norm(), 1e-300);
  const long sign = side == Side::left ? -1 : 1;
  for (int o = 1; o <= kMaxTraceOffset; ++o) {
    bool ok = true;
    for (std::size_t k = 0; k < h.size() && ok; ++k) {
      if (traj.times[k] < t_settle) continue;
      const long j = traj.grid.cell_of(h[k]) + sign * o;
      ok = (cell_state(traj, k, j) - target).norm() <= rel_tol * scale;
    }
    if (ok) return o;
  }
  throw TraceError("calibrate_trace_offset: no offset up to " + std::to_string(kMaxTraceOffset) +
                   " reaches the target state within " + std::to_string(rel_tol));
}

}  // namespace shiftlab

#include "doctest.h"

#include "shiftlab/errors.hpp"
#include "shiftlab/fvm.hpp"

#include <cmath>

using namespace shiftlab;

namespace {

ModelPtr iso2() { return std::make_shared<IsentropicEuler>(2.0, 1.0); }

const double kV = std::sqrt(1.5);

// Independent quadrature for the initial mass: composite midpoint with many points.
double initial_mass(const InitialData& u0, const State& uL, const State& uR) {
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + (i + 0.5) * 2.0 / n;
    s += (u0(x) - (x <= 0 ? uL : uR)).squaredNorm() * 2.0 / n;
  }
  return s;
}

}  // namespace

TEST_CASE("grid validation") {
  Grid1D g;
  CHECK_NOTHROW(g.validate());
  g.N = 8;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  g.N = 100;
  g.cfl = 0.95;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  g.cfl = 0.5;
  CHECK(g.cell_of(0.0) == 50);
  CHECK(g.center(0) == doctest::Approx(-2.0 + 0.02));
}

TEST_CASE("perturbed data: exact step at eps = 0, quadratic mass scaling, determinism") {
  IsentropicEuler m(2.0, 1.0);
  const State uL = make_state({1.0, kV}), uR = make_state({1.0, -kV});
  const InitialData d0 = perturb_riemann_data(m, uL, uR, 0.0, {ProfileKind::bump, 0});
  CHECK(d0(-0.3) == uL);
  CHECK(d0(0.3) == uR);
  for (ProfileKind k : {ProfileKind::sine, ProfileKind::bump, ProfileKind::noise}) {
    const Profile p{k, 17};
    const double m1 = initial_mass(perturb_riemann_data(m, uL, uR, 0.01, p), uL, uR);
    const double m2 = initial_mass(perturb_riemann_data(m, uL, uR, 0.02, p), uL, uR);
    CHECK(m2 / m1 == doctest::Approx(4.0).epsilon(0.01));
  }
  const InitialData a = perturb_riemann_data(m, uL, uR, 0.05, {ProfileKind::noise, 3});
  const InitialData b = perturb_riemann_data(m, uL, uR, 0.05, {ProfileKind::noise, 3});
  const InitialData c = perturb_riemann_data(m, uL, uR, 0.05, {ProfileKind::noise, 4});
  bool differs = false;
  for (double x = -1.0; x < 1.0; x += 0.01) {
    CHECK(a(x) == b(x));
    differs = differs || a(x) != c(x);
  }
  CHECK(differs);
  CHECK_THROWS_AS(perturb_riemann_data(m, uL, uR, 5.0, {ProfileKind::sine, 0}), DomainError);
  CHECK(profile_value({ProfileKind::bump, 0}, 0.0) == doctest::Approx(1.0));
  CHECK(profile_value({ProfileKind::bump, 0}, 1.0) == 0.0);
}

TEST_CASE("constant data stay constant") {
  auto m = iso2();
  const State u = make_state({1.3, 0.2});
  Grid1D g{-1.0, 1.0, 64, 0.45};
  for (Scheme s : {Scheme::rusanov, Scheme::godunov_exact}) {
    const Trajectory tr = simulate(m, [&](double) { return u; }, g, 0.3, {s});
    for (const auto& snap : tr.snapshots) {
      for (const auto& v : snap) CHECK((v - u).norm() <= 1e-15);
    }
    const EntropyResidualReport e = entropy_residual(tr);
    CHECK(e.max_excess == 0.0);
    CHECK(e.pass);
  }
}

TEST_CASE("conservation and entropy inequality on the two-shock run") {
  auto m = iso2();
  const State uL = make_state({1.0, kV}), uR = make_state({1.0, -kV});
  Grid1D g{-2.0, 2.0, 400, 0.45};
  for (Scheme s : {Scheme::rusanov, Scheme::godunov_exact}) {
    const InitialData d = perturb_riemann_data(*m, uL, uR, 0.02, {ProfileKind::bump, 0});
    const Trajectory tr = simulate(m, d, g, 0.2, {s});
    CHECK(tr.times.back() == 0.2);
    CHECK(conservation_defect(tr) < 1e-10);
    const EntropyResidualReport e = entropy_residual(tr);
    CHECK(e.pass);
    CHECK(e.max_excess <= 1e-10);
  }
}

TEST_CASE("anti-diffusive flux fails the entropy check") {
  auto m = iso2();
  const State uL = make_state({1.0, kV}), uR = make_state({1.0, -kV});
  Grid1D g{-2.0, 2.0, 200, 0.45};
  SimulationOptions o;
  o.diffusion_sign = -1.0;
  const Trajectory tr = simulate(m, perturb_riemann_data(*m, uL, uR, 0.0, {}), g, 0.005, o);
  CHECK_FALSE(entropy_residual(tr).pass);
}

TEST_CASE("Godunov self-convergence on the two-shock data") {
  auto m = iso2();
  const State uL = make_state({1.0, kV}), uR = make_state({1.0, -kV});
  const RiemannSolution exact = solve_riemann(m, uL, uR);
  std::vector<double> errs;
  for (int N : {500, 1000, 2000}) {
    Grid1D g{-2.0, 2.0, N, 0.45};
    const Trajectory tr = simulate(m, perturb_riemann_data(*m, uL, uR, 0.0, {}), g, 0.2,
                                   {Scheme::godunov_exact, 1});
    errs.push_back(l1_error(tr, tr.steps(), exact));
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  // rate at least ~0.8 in dx
  CHECK(std::log(errs[0] / errs[2]) / std::log(4.0) > 0.7);
}

TEST_CASE("Sod plateau values with Rusanov") {
  auto m = std::make_shared<FullEuler>(1.4);
  const State uL = m->from_primitive(make_state({1.0, 0.0, 1.0}));
  const State uR = m->from_primitive(make_state({0.125, 0.0, 0.1}));
  const RiemannSolution exact = solve_riemann(m, uL, uR);
  Grid1D g{-1.0, 1.0, 2000, 0.45};
  const Trajectory tr = simulate(m, perturb_riemann_data(*m, uL, uR, 0.0, {}), g, 0.2);
  const State star = m->to_primitive(exact.states[1]);
  // plateau between the fan tail and the contact
  const double x = 0.5 * (exact.waves[0].speed_hi + exact.waves[1].sigma) * 0.2;
  const State w = m->to_primitive(tr.snapshots.back()[static_cast<std::size_t>(g.cell_of(x))]);
  CHECK(std::abs(w(2) - star(2)) / star(2) < 0.02);
  CHECK(std::abs(w(1) - star(1)) / star(1) < 0.02);
}

TEST_CASE("determinism") {
  auto m = iso2();
  const State uL = make_state({1.0, kV}), uR = make_state({1.0, -kV});
  Grid1D g{-2.0, 2.0, 200, 0.45};
  const Profile p{ProfileKind::noise, 11};
  const Trajectory a = simulate(m, perturb_riemann_data(*m, uL, uR, 0.05, p), g, 0.1);
  const Trajectory b = simulate(m, perturb_riemann_data(*m, uL, uR, 0.05, p), g, 0.1);
  REQUIRE(a.times == b.times);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    for (std::size_t j = 0; j < a.snapshots[k].size(); ++j) {
      CHECK(a.snapshots[k][j] == b.snapshots[k][j]);
    }
  }
}

TEST_CASE("traces: constant, smooth region, exact shock") {
  auto m = iso2();
  const State u = make_state({1.3, 0.2});
  Grid1D g{-1.0, 1.0, 64, 0.45};
  const Trajectory c = simulate(m, [&](double) { return u; }, g, 0.1);
  std::vector<double> h(c.times.size(), 0.1);
  const TraceSeries tc = trace_at(c, h);
  for (std::size_t k = 0; k < h.size(); ++k) {
    CHECK((tc.left_states[k] - u).norm() <= 1e-15);
    CHECK((tc.right_states[k] - u).norm() <= 1e-15);
  }
  std::vector<double> bad(c.times.size(), 0.95);
  CHECK_THROWS_AS(trace_at(c, bad), TraceError);

  // a single 1-shock (1,0) -> (2,-sqrt6) on a static-data background
  const State uL = make_state({1.0, 0.0}), uR = make_state({2.0, -std::sqrt(6.0)});
  const double sigma = -std::sqrt(6.0);
  for (Scheme s : {Scheme::rusanov, Scheme::godunov_exact}) {
    std::vector<int> widths;
    for (int N : {500, 2000}) {
      Grid1D g2{-2.0, 2.0, N, 0.45};
      const Trajectory tr = simulate(m, perturb_riemann_data(*m, uL, uR, 0.0, {}), g2, 0.3, {s});
      std::vector<double> path;
      for (double t : tr.times) path.push_back(sigma * t);
      const double settle = tr.times[10];
      const int ol = calibrate_trace_offset(tr, path, Side::left, uL, 0.02, settle);
      const int orr = calibrate_trace_offset(tr, path, Side::right, uR, 0.02, settle);
      // the numerical shock layer is a few cells wide and does not widen in cell units
      CHECK(ol <= 12);
      CHECK(orr <= 12);
      widths.push_back(ol + orr);
      const TraceSeries ts = trace_at(tr, path, TraceOffsets{ol, orr});
      for (std::size_t k = 10; k < path.size(); ++k) {
        CHECK((ts.left_states[k] - uL).norm() / uL.norm() <= 0.02);
        CHECK((ts.right_states[k] - uR).norm() / uR.norm() <= 0.02);
      }
      CHECK_THROWS_AS(calibrate_trace_offset(tr, path, Side::right, uL, 0.02, settle), TraceError);
      if (N == 500) continue;
    // far from the shock the two sides agree
    std::vector<double> far(tr.times.size(), 1.0);
    const TraceSeries tf = trace_at(tr, far);
    for (std::size_t k = 0; k < far.size(); ++k) {
      CHECK((tf.left_states[k] - tf.right_states[k]).norm() <= 1e-10);
    }
    }
    CHECK(widths[1] <= widths[0] + 2);
  }
}

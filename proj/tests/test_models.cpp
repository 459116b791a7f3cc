#include "doctest.h"

#include "shiftlab/errors.hpp"
#include "shiftlab/models.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace shiftlab;

namespace {

// Closed forms written out independently of the library, used as oracles.
struct HandIsentropic {
  double g, k;
  double eta(double r, double m) const { return m * m / (2 * r) + k * std::pow(r, g) / (g - 1); }
  double q(double r, double m) const {
    return m * m * m / (2 * r * r) + g * k / (g - 1) * m * std::pow(r, g - 1);
  }
  double f1(double, double m) const { return m; }
  double f2(double r, double m) const { return m * m / r + k * std::pow(r, g); }
  double deta_r(double r, double m) const {
    return -m * m / (2 * r * r) + g * k * std::pow(r, g - 1) / (g - 1);
  }
  double deta_m(double r, double m) const { return m / r; }
};

StateBox iso_box() { return StateBox{make_state({0.1, -3.0}), make_state({5.0, 3.0})}; }
StateBox full_box() {
  return StateBox{make_state({0.1, -3.0, 0.1}), make_state({5.0, 3.0, 5.0})};
}

StateList random_states(const SystemModel& m, const StateBox& b, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  StateList out;
  for (int i = 0; i < count; ++i) out.push_back(b.sample(m, rng));
  return out;
}

// Composite Simpson on the Taylor remainder integral; independent of library quadrature.
double taylor_relative_entropy(const SystemModel& m, const State& u, const State& v) {
  const int steps = 2000;
  const State d = u - v;
  auto g = [&](double t) {
    return (1 - t) * d.dot(m.entropy_hessian(v + t * d) * d);
  };
  double sum = g(0) + g(1);
  for (int i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(static_cast<double>(i) / steps);
  return sum / (3.0 * steps);
}

struct CorruptedQ : IsentropicEuler {
  CorruptedQ() : IsentropicEuler(2.0, 1.0) {}
  double do_entropy_flux(const State& u) const override {
    return IsentropicEuler::do_entropy_flux(u) + u(0);
  }
};

}  // namespace

TEST_CASE("isentropic flux and speeds at reference states") {
  IsentropicEuler m(2.0, 1.0);
  const State f = m.flux(make_state({1.0, 0.0}));
  CHECK(f(0) == doctest::Approx(0.0));
  CHECK(f(1) == doctest::Approx(1.0));
  const State f2 = m.flux(make_state({2.0, -2.44949}));
  CHECK(f2(0) == doctest::Approx(-2.44949));
  CHECK(f2(1) == doctest::Approx(2.44949 * 2.44949 / 2.0 + 4.0).epsilon(1e-12));
  CHECK(f2(1) == doctest::Approx(7.0).epsilon(1e-5));

  const State s = m.char_speeds(make_state({1.0, 0.0}));
  CHECK(s(0) == doctest::Approx(-std::sqrt(2.0)));
  CHECK(s(1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(m.lambda(make_state({2.0, -2.44949}), 1) == doctest::Approx(-3.224745).epsilon(1e-6));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    State u = iso_box().sample(m, rng);
    u(1) = 0.0;
    CHECK(m.flux(u)(0) == 0.0);
  }
}

TEST_CASE("inadmissible states raise domain errors naming the predicate") {
  IsentropicEuler m(2.0, 1.0);
  CHECK_THROWS_AS(m.flux(make_state({0.0, 1.0})), DomainError);
  try {
    m.char_speeds(make_state({-1.0, 0.0}));
    FAIL("expected throw");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("rho") != std::string::npos);
  }
  FullEuler fe(1.4);
  CHECK_THROWS_AS(fe.entropy(make_state({1.0, 2.0, 1.0})), DomainError);
  CHECK_THROWS_AS(relative_entropy(m, make_state({1.0, 0.0}), make_state({1e-13, 0.0})),
                  DomainError);
  CHECK_THROWS_AS(IsentropicEuler(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(FullEuler(1.0), DomainError);
}

TEST_CASE("relative entropy and relative entropy flux against hand evaluation") {
  IsentropicEuler m(2.0, 1.0);
  HandIsentropic h{2.0, 1.0};
  const State u = make_state({1.0, 0.0}), v = make_state({2.0, 0.0});
  CHECK(relative_entropy(m, u, v) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(relative_entropy(m, u, u) == 0.0);

  const double oracle = h.q(1, 0) - h.q(2, 0) -
                        (h.deta_r(2, 0) * (h.f1(1, 0) - h.f1(2, 0)) +
                         h.deta_m(2, 0) * (h.f2(1, 0) - h.f2(2, 0)));
  CHECK(relative_entropy_flux(m, u, v) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(relative_entropy_flux(m, v, v) == 0.0);

  // off-axis pair through the hand formulas as well
  const State a = make_state({1.3, 0.7}), b = make_state({0.6, -0.4});
  const double eo = h.eta(1.3, 0.7) - h.eta(0.6, -0.4) -
                    (h.deta_r(0.6, -0.4) * 0.7 + h.deta_m(0.6, -0.4) * 1.1);
  CHECK(relative_entropy(m, a, b) == doctest::Approx(eo).epsilon(1e-13));
}

TEST_CASE("relative flux: identity, hand value and quadratic remainder") {
  IsentropicEuler m(2.0, 1.0);
  const State a = make_state({1.0, 0.0}), b = make_state({2.0, 0.0});
  CHECK(relative_flux(m, b, b).norm() == 0.0);
  const State rf = relative_flux(m, a, b);
  // kappa * (rho_a^2 - rho_b^2 - 2 rho_b (rho_a - rho_b)) = kappa (rho_a - rho_b)^2
  CHECK(rf(0) == doctest::Approx(0.0));
  CHECK(rf(1) == doctest::Approx(1.0).epsilon(1e-14));

  FullEuler fe(1.4);
  for (const SystemModel* model : {static_cast<const SystemModel*>(&m),
                                   static_cast<const SystemModel*>(&fe)}) {
    const State base = model->n() == 2 ? make_state({1.2, 0.3}) : make_state({1.2, 0.3, 2.0});
    State w = State::Ones(model->n()).normalized();
    double prev = -1.0;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      const double ratio = relative_flux(*model, base + eps * w, base).norm() / (eps * eps);
      CHECK(std::isfinite(ratio));
      if (prev > 0) CHECK(std::abs(ratio - prev) / prev < 0.15);
      prev = ratio;
    }
  }
}

TEST_CASE("relative entropy gradient is second order in a - b") {
  for (int which = 0; which < 2; ++which) {
    std::unique_ptr<SystemModel> m;
    if (which == 0) m = std::make_unique<IsentropicEuler>(1.4, 0.7);
    else m = std::make_unique<FullEuler>(1.4);
    const State b = m->n() == 2 ? make_state({0.8, -0.2}) : make_state({0.8, -0.2, 1.5});
    CHECK(relative_entropy_gradient(*m, b, b).norm() == 0.0);
    State w = State::LinSpaced(m->n(), 1.0, 2.0).normalized();
    const double r1 = relative_entropy_gradient(*m, b + 1e-2 * w, b).norm() / 1e-4;
    const double r2 = relative_entropy_gradient(*m, b + 1e-3 * w, b).norm() / 1e-6;
    CHECK(std::abs(r1 - r2) / r2 < 0.05);
  }
}

TEST_CASE("entropy compatibility on random states for both models") {
  IsentropicEuler iso(2.0, 1.0);
  const auto rep = check_compatibility(iso, random_states(iso, iso_box(), 1000, 11));
  CHECK(rep.pass);
  CHECK(rep.max_residual < 1e-5);
  CHECK(rep.max_analytic_mismatch < 1e-5);

  IsentropicEuler iso2(1.4, 0.5);
  CHECK(check_compatibility(iso2, random_states(iso2, iso_box(), 300, 12)).pass);

  FullEuler fe(1.4);
  const auto rf = check_compatibility(fe, random_states(fe, full_box(), 1000, 13));
  CHECK(rf.pass);
  CHECK(rf.max_residual < 1e-5);

  ReflectedModel refl(std::make_shared<FullEuler>(1.4));
  CHECK(check_compatibility(refl, random_states(refl, full_box(), 200, 14)).pass);
}

TEST_CASE("corrupted entropy flux fails compatibility") {
  CorruptedQ bad;
  const auto rep = check_compatibility(bad, random_states(bad, iso_box(), 50, 5));
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_residual > 1e-3);
  CHECK(rep.worst_state.size() == 2);
}

TEST_CASE("degenerate gamma = 1 gives non-finite entropy and fails compatibility") {
  IsentropicEuler m(1.0, 1.0);
  const auto rep = check_compatibility(m, random_states(m, iso_box(), 10, 5));
  CHECK_FALSE(rep.pass);
  CHECK(rep.non_finite > 0);
}

TEST_CASE("entropy Hessian is symmetric positive definite and matches FD of the gradient") {
  for (int which = 0; which < 2; ++which) {
    std::unique_ptr<SystemModel> m;
    if (which == 0) m = std::make_unique<IsentropicEuler>(2.0, 1.0);
    else m = std::make_unique<FullEuler>(1.4);
    const StateBox box = which == 0 ? iso_box() : full_box();
    for (const State& u : random_states(*m, box, 1000, 21 + which)) {
      const Matrix H = m->entropy_hessian(u);
      CHECK((H - H.transpose()).norm() <= 1e-12 * H.norm());
      CHECK(hessian_min_eigenvalue(*m, u) > 0.0);
    }
    for (const State& u : random_states(*m, box, 50, 31 + which)) {
      Matrix fd(m->n(), m->n());
      for (int j = 0; j < m->n(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(u(j)));
        State up = u, um = u;
        up(j) += h;
        um(j) -= h;
        fd.col(j) = (m->entropy_gradient(up) - m->entropy_gradient(um)) / (2 * h);
      }
      const Matrix H = m->entropy_hessian(u);
      CHECK((fd - H).cwiseAbs().maxCoeff() <= 1e-6 * H.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("speeds are sorted eigenvalues of the flux Jacobian with matching eigenvectors") {
  IsentropicEuler iso(2.0, 1.0);
  FullEuler fe(1.4);
  ReflectedModel refl(std::make_shared<FullEuler>(1.4));
  for (const SystemModel* m : {static_cast<const SystemModel*>(&iso),
                               static_cast<const SystemModel*>(&fe),
                               static_cast<const SystemModel*>(&refl)}) {
    const StateBox box = m->n() == 2 ? iso_box() : full_box();
    for (const State& u : random_states(*m, box, 500, 41)) {
      const State lam = m->char_speeds(u);
      const Matrix J = m->flux_jacobian(u);
      const Matrix R = m->eigenvectors(u);
      for (int k = 0; k < m->n(); ++k) {
        if (k > 0) CHECK(lam(k - 1) <= lam(k));
        const State w = R.col(k);
        CHECK((J * w - lam(k) * w).norm() < 1e-8 * std::max(1.0, w.norm() * J.norm()));
      }
      Eigen::EigenSolver<Matrix> es(J);
      State ev = es.eigenvalues().real();
      std::sort(ev.data(), ev.data() + ev.size());
      CHECK((ev - lam).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("relative entropy is nonnegative and agrees with the Taylor remainder") {
  IsentropicEuler iso(2.0, 1.0);
  FullEuler fe(1.4);
  std::mt19937_64 rng(77);
  const StateBox ib{make_state({0.5, -2.0}), make_state({3.0, 2.0})};
  for (int i = 0; i < 10000; ++i) {
    const State u = ib.sample(iso, rng), v = ib.sample(iso, rng);
    const double e = relative_entropy(iso, u, v);
    CHECK(e >= 0.0);
    if (i < 200) {
      const double t = taylor_relative_entropy(iso, u, v);
      CHECK(std::abs(e - t) <= 1e-8 * std::abs(t));
    }
  }
  // Full Euler: segments between nearby states stay admissible.
  for (int i = 0; i < 200; ++i) {
    const State u = full_box().sample(fe, rng);
    State v = u;
    v(0) *= 1.2;
    v(1) += 0.1;
    v(2) *= 1.3;
    const double e = relative_entropy(fe, u, v);
    CHECK(e > 0.0);
    CHECK(std::abs(e - taylor_relative_entropy(fe, u, v)) <= 1e-8 * e);
  }
}

TEST_CASE("quadratic bounds sandwich the relative entropy") {
  IsentropicEuler m(2.0, 1.0);
  const StateBox box{make_state({0.5, -2.0}), make_state({3.0, 2.0})};
  const QuadraticBounds qb = quadratic_bounds(m, box);
  CHECK(qb.c_star > 0.0);
  CHECK(qb.c_star <= qb.c_star_star);
  std::mt19937_64 rng(99);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const State a = box.sample(m, rng), b = box.sample(m, rng);
    const double d2 = (a - b).squaredNorm();
    const double e = relative_entropy(m, a, b);
    if (e < qb.c_star * d2 || e > qb.c_star_star * d2) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("quadratic bounds at a single point and at the boundary") {
  IsentropicEuler m(2.0, 1.0);
  const State w = make_state({1.5, 0.5});
  const QuadraticBounds qb = quadratic_bounds(m, StateBox{w, w});
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.entropy_hessian(m.from_primitive(w)));
  CHECK(qb.c_star == doctest::Approx(0.5 * es.eigenvalues()(0)).epsilon(1e-14));
  CHECK(qb.c_star_star == doctest::Approx(0.5 * es.eigenvalues()(1)).epsilon(1e-14));

  CHECK_THROWS_AS(quadratic_bounds(m, StateBox{make_state({0.0, -1.0}), make_state({1.0, 1.0})}),
                  DomainError);
  FullEuler fe(1.4);
  CHECK_THROWS_AS(
      quadratic_bounds(fe, StateBox{make_state({0.5, -1.0, 0.0}), make_state({1.0, 1.0, 1.0})}),
      DomainError);
}

TEST_CASE("reflected model mirrors speeds and entropy flux") {
  auto base = std::make_shared<IsentropicEuler>(2.0, 1.0);
  ReflectedModel r(base);
  const State u = make_state({1.7, 0.4});
  CHECK(r.flux(u).isApprox(-base->flux(u)));
  CHECK(r.entropy(u) == base->entropy(u));
  CHECK(r.entropy_flux(u) == -base->entropy_flux(u));
  CHECK(r.lambda(u, 1) == -base->lambda(u, 2));
  CHECK(r.lambda(u, 2) == -base->lambda(u, 1));
}

TEST_CASE("primitive round trip and box helpers") {
  FullEuler fe(1.4);
  const State w = make_state({0.125, 0.3, 0.1});
  CHECK(fe.to_primitive(fe.from_primitive(w)).isApprox(w, 1e-14));
  const StateBox b = full_box();
  const auto g = b.grid(fe, 3);
  CHECK(g.size() == 27);
  CHECK(b.grid(fe, 1).size() == 1);
  const StateBox h = StateBox::hull(fe, {fe.from_primitive(w), fe.from_primitive(2 * w)}, 0.0);
  CHECK(h.lo.isApprox(w));
  CHECK(h.hi.isApprox(2 * w));
  CHECK_THROWS_AS(make_model("burgers", 2.0), ConfigError);
}

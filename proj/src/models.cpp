#include "shiftlab/models.hpp"

#include "shiftlab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace shiftlab {

std::string to_string(const State& u) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u(i);
  os << ')';
  return os.str();
}

const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::precondition: return "precondition";
    case ErrorCategory::continuation: return "continuation";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::vacuum: return "vacuum";
    case ErrorCategory::simulation: return "simulation";
    case ErrorCategory::trace: return "trace";
    case ErrorCategory::integration: return "integration";
    case ErrorCategory::selection: return "selection";
    case ErrorCategory::construction: return "construction";
    case ErrorCategory::configuration: return "configuration";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

// ---- SystemModel dispatch -------------------------------------------------

std::optional<std::string> SystemModel::admissibility_violation(const State& u) const {
  if (u.size() != n()) {
    return "state has " + std::to_string(u.size()) + " components, model expects " +
           std::to_string(n());
  }
  if (!u.allFinite()) return std::string("non-finite component");
  return do_admissibility_violation(u);
}

void SystemModel::require_admissible(const State& u, const char* context) const {
  if (auto why = admissibility_violation(u)) {
    throw DomainError(std::string(context) + ": inadmissible state " + to_string(u) + " (" +
                      *why + ")");
  }
}

State SystemModel::flux(const State& u) const {
  require_admissible(u, "flux");
  return do_flux(u);
}
Matrix SystemModel::flux_jacobian(const State& u) const {
  require_admissible(u, "flux_jacobian");
  return do_flux_jacobian(u);
}
double SystemModel::entropy(const State& u) const {
  require_admissible(u, "entropy");
  return do_entropy(u);
}
State SystemModel::entropy_gradient(const State& u) const {
  require_admissible(u, "entropy_gradient");
  return do_entropy_gradient(u);
}
Matrix SystemModel::entropy_hessian(const State& u) const {
  require_admissible(u, "entropy_hessian");
  return do_entropy_hessian(u);
}
double SystemModel::entropy_flux(const State& u) const {
  require_admissible(u, "entropy_flux");
  return do_entropy_flux(u);
}
State SystemModel::char_speeds(const State& u) const {
  require_admissible(u, "char_speeds");
  return do_char_speeds(u);
}
Matrix SystemModel::eigenvectors(const State& u) const {
  require_admissible(u, "eigenvectors");
  return do_eigenvectors(u);
}
State SystemModel::from_primitive(const State& w) const {
  if (w.size() != n()) throw DomainError("from_primitive: wrong number of components");
  State u = do_from_primitive(w);
  require_admissible(u, "from_primitive");
  return u;
}
State SystemModel::to_primitive(const State& u) const {
  require_admissible(u, "to_primitive");
  return do_to_primitive(u);
}

// ---- isentropic Euler ----------------------------------------------------

IsentropicEuler::IsentropicEuler(double gamma, double kappa) : gamma_(gamma), kappa_(kappa) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw DomainError("isentropic_euler: gamma must be >= 1, got " + std::to_string(gamma));
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw DomainError("isentropic_euler: kappa must be > 0, got " + std::to_string(kappa));
  }
}

std::map<std::string, double> IsentropicEuler::params() const {
  return {{"gamma", gamma_}, {"kappa", kappa_}};
}

double IsentropicEuler::pressure(double rho) const { return kappa_ * std::pow(rho, gamma_); }

double IsentropicEuler::sound_speed(double rho) const {
  return std::sqrt(gamma_ * kappa_ * std::pow(rho, gamma_ - 1.0));
}

std::optional<std::string> IsentropicEuler::do_admissibility_violation(const State& u) const {
  if (!(u(0) > kAdmissibilityMargin)) return std::string("density rho <= 1e-12");
  return std::nullopt;
}

State IsentropicEuler::do_flux(const State& u) const {
  const double rho = u(0), m = u(1);
  return make_state({m, m * m / rho + pressure(rho)});
}

Matrix IsentropicEuler::do_flux_jacobian(const State& u) const {
  const double rho = u(0), v = u(1) / rho;
  const double c = sound_speed(rho);
  Matrix J(2, 2);
  J << 0.0, 1.0, c * c - v * v, 2.0 * v;
  return J;
}

double IsentropicEuler::do_entropy(const State& u) const {
  const double rho = u(0), m = u(1);
  return m * m / (2.0 * rho) + kappa_ * std::pow(rho, gamma_) / (gamma_ - 1.0);
}

State IsentropicEuler::do_entropy_gradient(const State& u) const {
  const double rho = u(0), m = u(1);
  return make_state({-m * m / (2.0 * rho * rho) +
                         gamma_ * kappa_ * std::pow(rho, gamma_ - 1.0) / (gamma_ - 1.0),
                     m / rho});
}

Matrix IsentropicEuler::do_entropy_hessian(const State& u) const {
  const double rho = u(0), m = u(1);
  Matrix H(2, 2);
  const double off = -m / (rho * rho);
  H << m * m / (rho * rho * rho) + gamma_ * kappa_ * std::pow(rho, gamma_ - 2.0), off, off,
      1.0 / rho;
  return H;
}

double IsentropicEuler::do_entropy_flux(const State& u) const {
  const double rho = u(0), m = u(1);
  return m * m * m / (2.0 * rho * rho) +
         gamma_ * kappa_ / (gamma_ - 1.0) * m * std::pow(rho, gamma_ - 1.0);
}

State IsentropicEuler::do_char_speeds(const State& u) const {
  const double v = u(1) / u(0), c = sound_speed(u(0));
  return make_state({v - c, v + c});
}

Matrix IsentropicEuler::do_eigenvectors(const State& u) const {
  const State lam = do_char_speeds(u);
  Matrix R(2, 2);
  R << 1.0, 1.0, lam(0), lam(1);
  return R;
}

State IsentropicEuler::do_from_primitive(const State& w) const {
  return make_state({w(0), w(0) * w(1)});
}

State IsentropicEuler::do_to_primitive(const State& u) const {
  return make_state({u(0), u(1) / u(0)});
}

// ---- full Euler ------------------------------------------------------------

FullEuler::FullEuler(double gamma) : gamma_(gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw DomainError("full_euler: gamma must be > 1, got " + std::to_string(gamma));
  }
}

std::map<std::string, double> FullEuler::params() const { return {{"gamma", gamma_}}; }

double FullEuler::pressure(const State& u) const {
  return (gamma_ - 1.0) * (u(2) - 0.5 * u(1) * u(1) / u(0));
}

double FullEuler::sound_speed(const State& u) const {
  return std::sqrt(gamma_ * pressure(u) / u(0));
}

std::optional<std::string> FullEuler::do_admissibility_violation(const State& u) const {
  if (!(u(0) > kAdmissibilityMargin)) return std::string("density rho <= 1e-12");
  if (!(u(2) - 0.5 * u(1) * u(1) / u(0) > kAdmissibilityMargin)) {
    return std::string("internal energy <= 1e-12");
  }
  return std::nullopt;
}

State FullEuler::do_flux(const State& u) const {
  const double rho = u(0), m = u(1), E = u(2);
  const double v = m / rho, p = pressure(u);
  return make_state({m, m * v + p, (E + p) * v});
}

Matrix FullEuler::do_flux_jacobian(const State& u) const {
  const double g = gamma_;
  const double rho = u(0), v = u(1) / rho;
  const double H = (u(2) + pressure(u)) / rho;
  Matrix J(3, 3);
  J << 0.0, 1.0, 0.0,                                                 //
      0.5 * (g - 3.0) * v * v, (3.0 - g) * v, g - 1.0,                //
      v * (0.5 * (g - 1.0) * v * v - H), H - (g - 1.0) * v * v, g * v;
  return J;
}

namespace {
double specific_entropy(double gamma, double rho, double p) {
  return std::log(p) - gamma * std::log(rho);
}
}  // namespace

double FullEuler::do_entropy(const State& u) const {
  const double rho = u(0);
  return -rho * specific_entropy(gamma_, rho, pressure(u)) / (gamma_ - 1.0);
}

State FullEuler::do_entropy_gradient(const State& u) const {
  const double g = gamma_;
  const double rho = u(0), v = u(1) / rho, p = pressure(u);
  const double s = specific_entropy(g, rho, p);
  return make_state({(g - s) / (g - 1.0) - rho * v * v / (2.0 * p), rho * v / p, -rho / p});
}

Matrix FullEuler::do_entropy_hessian(const State& u) const {
  // Differentiate the entropy variables w = (w1, m/p, -rho/p) through p(rho, m, E).
  const double g = gamma_;
  const double rho = u(0), m = u(1), p = pressure(u);
  const double pr = 0.5 * (g - 1.0) * m * m / (rho * rho);
  const double pm = -(g - 1.0) * m / rho;
  const double pe = g - 1.0;
  const double dp[3] = {pr, pm, pe};
  const double ds[3] = {pr / p - g / rho, pm / p, pe / p};
  // w1 = (g - s)/(g - 1) - m^2/(2 rho p)
  const double k = m * m / (2.0 * rho * p);
  const double dk[3] = {-k / rho - k * pr / p, m / (rho * p) - k * pm / p, -k * pe / p};
  Matrix Hm(3, 3);
  for (int j = 0; j < 3; ++j) {
    Hm(0, j) = -ds[j] / (g - 1.0) - dk[j];
    Hm(1, j) = (j == 1 ? 1.0 / p : 0.0) - m * dp[j] / (p * p);
    Hm(2, j) = (j == 0 ? -1.0 / p : 0.0) + rho * dp[j] / (p * p);
  }
  return 0.5 * (Hm + Hm.transpose());
}

double FullEuler::do_entropy_flux(const State& u) const { return do_entropy(u) * u(1) / u(0); }

State FullEuler::do_char_speeds(const State& u) const {
  const double v = u(1) / u(0), c = sound_speed(u);
  return make_state({v - c, v, v + c});
}

Matrix FullEuler::do_eigenvectors(const State& u) const {
  const double rho = u(0), v = u(1) / rho, c = sound_speed(u);
  const double H = (u(2) + pressure(u)) / rho;
  Matrix R(3, 3);
  R << 1.0, 1.0, 1.0,             //
      v - c, v, v + c,            //
      H - v * c, 0.5 * v * v, H + v * c;
  return R;
}

State FullEuler::do_from_primitive(const State& w) const {
  const double rho = w(0), v = w(1), p = w(2);
  return make_state({rho, rho * v, p / (gamma_ - 1.0) + 0.5 * rho * v * v});
}

State FullEuler::do_to_primitive(const State& u) const {
  return make_state({u(0), u(1) / u(0), pressure(u)});
}

// ---- reflected model -------------------------------------------------------

ReflectedModel::ReflectedModel(ModelPtr base) : base_(std::move(base)) {
  if (!base_) throw PreconditionError("ReflectedModel: null base model");
}

std::optional<std::string> ReflectedModel::do_admissibility_violation(const State& u) const {
  return base_->admissibility_violation(u);
}
State ReflectedModel::do_flux(const State& u) const { return -base_->flux(u); }
Matrix ReflectedModel::do_flux_jacobian(const State& u) const {
  return -base_->flux_jacobian(u);
}
double ReflectedModel::do_entropy(const State& u) const { return base_->entropy(u); }
State ReflectedModel::do_entropy_gradient(const State& u) const {
  return base_->entropy_gradient(u);
}
Matrix ReflectedModel::do_entropy_hessian(const State& u) const {
  return base_->entropy_hessian(u);
}
double ReflectedModel::do_entropy_flux(const State& u) const { return -base_->entropy_flux(u); }
State ReflectedModel::do_char_speeds(const State& u) const {
  return (-base_->char_speeds(u)).reverse();
}
Matrix ReflectedModel::do_eigenvectors(const State& u) const {
  return base_->eigenvectors(u).rowwise().reverse();
}
State ReflectedModel::do_from_primitive(const State& w) const { return base_->from_primitive(w); }
State ReflectedModel::do_to_primitive(const State& u) const { return base_->to_primitive(u); }

ModelPtr make_model(const std::string& name, double gamma, double kappa) {
  if (name == "isentropic_euler") return std::make_shared<IsentropicEuler>(gamma, kappa);
  if (name == "full_euler") return std::make_shared<FullEuler>(gamma);
  throw ConfigError("unknown model '" + name + "' (expected isentropic_euler or full_euler)");
}

// ---- relative quantities ---------------------------------------------------

double relative_entropy(const SystemModel& model, const State& u, const State& v) {
  model.require_admissible(u, "relative_entropy");
  model.require_admissible(v, "relative_entropy");
  return model.entropy(u) - model.entropy(v) - model.entropy_gradient(v).dot(u - v);
}

double relative_entropy_flux(const SystemModel& model, const State& u, const State& v) {
  model.require_admissible(u, "relative_entropy_flux");
  model.require_admissible(v, "relative_entropy_flux");
  return model.entropy_flux(u) - model.entropy_flux(v) -
         model.entropy_gradient(v).dot(model.flux(u) - model.flux(v));
}

State relative_flux(const SystemModel& model, const State& a, const State& b) {
  model.require_admissible(a, "relative_flux");
  model.require_admissible(b, "relative_flux");
  return model.flux(a) - model.flux(b) - model.flux_jacobian(b) * (a - b);
}

State relative_entropy_gradient(const SystemModel& model, const State& a, const State& b) {
  model.require_admissible(a, "relative_entropy_gradient");
  model.require_admissible(b, "relative_entropy_gradient");
  return model.entropy_gradient(a) - model.entropy_gradient(b) -
         model.entropy_hessian(b).transpose() * (a - b);
}

// ---- boxes -------------------------------------------------------------------

bool StateBox::contains_primitive(const State& w) const {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < lo(i) || w(i) > hi(i)) return false;
  }
  return true;
}

State StateBox::sample(const SystemModel& model, std::mt19937_64& rng) const {
  State w(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> d(lo(i), hi(i));
    w(i) = lo(i) == hi(i) ? lo(i) : d(rng);
  }
  return model.from_primitive(w);
}

StateList StateBox::grid(const SystemModel& model, int k) const {
  if (k < 1) throw PreconditionError("StateBox::grid: k must be >= 1");
  const auto d = lo.size();
  StateList out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    State w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double t = k == 1 ? 0.5 : static_cast<double>(idx[i]) / (k - 1);
      w(i) = lo(i) + t * (hi(i) - lo(i));
    }
    out.push_back(model.from_primitive(w));
    Eigen::Index i = 0;
    while (i < d && ++idx[i] == k) idx[i++] = 0;
    if (i == d) break;
  }
  return out;
}

StateBox StateBox::hull(const SystemModel& model, const StateList& states, double pad) {
  if (states.empty()) throw DomainError("StateBox::hull: empty state list");
  State lo = model.to_primitive(states.front()), hi = lo;
  for (const auto& u : states) {
    const State w = model.to_primitive(u);
    lo = lo.cwiseMin(w);
    hi = hi.cwiseMax(w);
  }
  const State ext = hi - lo;
  return StateBox{lo - pad * ext, hi + pad * ext};
}

StateBox StateBox::scaled(double factor) const {
  const State mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  return StateBox{mid - factor * half, mid + factor * half};
}

void require_admissible_box(const SystemModel& model, const StateBox& box) {
  if (box.lo.size() != model.n() || box.hi.size() != model.n()) {
    throw DomainError("state box dimension does not match the model");
  }
  if (!box.lo.allFinite() || !box.hi.allFinite()) throw DomainError("state box not finite");
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
    if (box.lo(i) > box.hi(i)) throw DomainError("state box has lo > hi");
  }
  if (!(box.lo(0) > kAdmissibilityMargin)) {
    throw DomainError("state box touches the admissibility boundary (density)");
  }
  if (model.n() == 3 && !(box.lo(2) > kAdmissibilityMargin)) {
    throw DomainError("state box touches the admissibility boundary (pressure)");
  }
}

// ---- certification -----------------------------------------------------------

namespace {

struct FdDerivatives {
  State grad_q;
  State grad_eta;
  Matrix jac_f;
};

FdDerivatives finite_differences(const SystemModel& model, const State& u) {
  const auto n = u.size();
  FdDerivatives d{State(n), State(n), Matrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(std::abs(u(j)), 1.0);
    State up = u, um = u;
    up(j) += h;
    um(j) -= h;
    d.grad_q(j) = (model.entropy_flux(up) - model.entropy_flux(um)) / (2.0 * h);
    d.grad_eta(j) = (model.entropy(up) - model.entropy(um)) / (2.0 * h);
    d.jac_f.col(j) = (model.flux(up) - model.flux(um)) / (2.0 * h);
  }
  return d;
}

double rel_mismatch(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (!(scale > 0.0)) return (a - b).cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

CompatibilityReport check_compatibility(const SystemModel& model, const StateList& samples) {
  CompatibilityReport rep;
  rep.samples = samples.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& u : samples) {
    double residual = nan, mismatch = nan;
    try {
      const FdDerivatives d = finite_differences(model, u);
      const auto n = u.size();
      State rhs = d.jac_f.transpose() * d.grad_eta;
      double magnitude = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        double term = std::abs(d.grad_q(j));
        for (Eigen::Index i = 0; i < n; ++i) term += std::abs(d.grad_eta(i) * d.jac_f(i, j));
        magnitude = std::max(magnitude, term);
      }
      const double abs_res = (d.grad_q - rhs).cwiseAbs().maxCoeff();
      residual = magnitude > 0.0 ? abs_res / magnitude : abs_res;
      mismatch = std::max(rel_mismatch(model.flux_jacobian(u), d.jac_f),
                          rel_mismatch(model.entropy_gradient(u), d.grad_eta));
    } catch (const DomainError&) {
      // leave NaN: counted as non-finite below
    }
    if (!std::isfinite(residual) || !std::isfinite(mismatch)) {
      ++rep.non_finite;
      if (rep.worst_state.size() == 0 || std::isfinite(rep.max_residual)) rep.worst_state = u;
      rep.max_residual = std::numeric_limits<double>::infinity();
      continue;
    }
    if (residual > rep.max_residual) {
      rep.max_residual = residual;
      rep.worst_state = u;
    }
    rep.max_analytic_mismatch = std::max(rep.max_analytic_mismatch, mismatch);
  }
  rep.pass = rep.samples > 0 && rep.non_finite == 0 &&
             rep.max_residual < kCompatibilityTolerance &&
             rep.max_analytic_mismatch < kCompatibilityTolerance;
  return rep;
}

double hessian_min_eigenvalue(const SystemModel& model, const State& u) {
  const Matrix H = model.entropy_hessian(u);
  if (!H.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

QuadraticBounds quadratic_bounds(const SystemModel& model, const StateBox& box) {
  require_admissible_box(model, box);
  const bool point = box.degenerate();
  const StateList pts = point ? StateList{model.from_primitive(box.lo)} : box.grid(model, 17);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& u : pts) {
    const Matrix H = model.entropy_hessian(u);
    if (!H.allFinite()) throw DomainError("quadratic_bounds: non-finite entropy Hessian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
    hi = std::max(hi, es.eigenvalues()(es.eigenvalues().size() - 1));
  }
  if (!(lo > 0.0)) throw DomainError("quadratic_bounds: entropy Hessian not positive definite");
  // A single point has no sampling gap, so no margin is applied there.
  const double shrink = point ? 1.0 : 0.9, inflate = point ? 1.0 : 1.1;
  return QuadraticBounds{0.5 * lo * shrink, 0.5 * hi * inflate, box};
}

}  // namespace shiftlab

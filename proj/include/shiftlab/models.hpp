#ifndef SHIFTLAB_MODELS_HPP
#define SHIFTLAB_MODELS_HPP

#include "shiftlab/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace shiftlab {

/// Densities and internal energies at or below this are treated as vacuum.
inline constexpr double kAdmissibilityMargin = 1e-12;

/// A hyperbolic system u_t + f(u)_x = 0 with a strictly convex entropy pair.
///
/// Public evaluators reject inadmissible states with DomainError and then
/// dispatch to the protected do_* hooks. Instances are immutable.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual int n() const = 0;
  virtual std::string name() const = 0;
  virtual std::map<std::string, double> params() const = 0;
  virtual std::vector<std::string> component_names() const = 0;
  virtual std::vector<std::string> primitive_names() const = 0;

  /// Empty when admissible, else a description of the violated predicate.
  std::optional<std::string> admissibility_violation(const State& u) const;
  bool is_admissible(const State& u) const { return !admissibility_violation(u); }
  /// Throws DomainError naming `context` and the violated predicate.
  void require_admissible(const State& u, const char* context) const;

  State flux(const State& u) const;
  Matrix flux_jacobian(const State& u) const;
  double entropy(const State& u) const;
  State entropy_gradient(const State& u) const;
  Matrix entropy_hessian(const State& u) const;
  double entropy_flux(const State& u) const;
  /// Ascending.
  State char_speeds(const State& u) const;
  /// Speed of family k, 1-based.
  double lambda(const State& u, int k) const { return char_speeds(u)(k - 1); }
  /// Right eigenvectors as columns, ordered like char_speeds.
  Matrix eigenvectors(const State& u) const;

  State from_primitive(const State& w) const;
  State to_primitive(const State& u) const;

 protected:
  virtual std::optional<std::string> do_admissibility_violation(const State& u) const = 0;
  virtual State do_flux(const State& u) const = 0;
  virtual Matrix do_flux_jacobian(const State& u) const = 0;
  virtual double do_entropy(const State& u) const = 0;
  virtual State do_entropy_gradient(const State& u) const = 0;
  virtual Matrix do_entropy_hessian(const State& u) const = 0;
  virtual double do_entropy_flux(const State& u) const = 0;
  virtual State do_char_speeds(const State& u) const = 0;
  virtual Matrix do_eigenvectors(const State& u) const = 0;
  virtual State do_from_primitive(const State& w) const = 0;
  virtual State do_to_primitive(const State& u) const = 0;
};

using ModelPtr = std::shared_ptr<const SystemModel>;

/// p = kappa * rho^gamma, conserved variables (rho, m).
class IsentropicEuler : public SystemModel {
 public:
  IsentropicEuler(double gamma, double kappa);

  int n() const override { return 2; }
  std::string name() const override { return "isentropic_euler"; }
  std::map<std::string, double> params() const override;
  std::vector<std::string> component_names() const override { return {"rho", "m"}; }
  std::vector<std::string> primitive_names() const override { return {"rho", "v"}; }

  double gamma() const { return gamma_; }
  double kappa() const { return kappa_; }
  double pressure(double rho) const;
  double sound_speed(double rho) const;

 protected:
  std::optional<std::string> do_admissibility_violation(const State& u) const override;
  State do_flux(const State& u) const override;
  Matrix do_flux_jacobian(const State& u) const override;
  double do_entropy(const State& u) const override;
  State do_entropy_gradient(const State& u) const override;
  Matrix do_entropy_hessian(const State& u) const override;
  double do_entropy_flux(const State& u) const override;
  State do_char_speeds(const State& u) const override;
  Matrix do_eigenvectors(const State& u) const override;
  State do_from_primitive(const State& w) const override;
  State do_to_primitive(const State& u) const override;

 private:
  double gamma_;
  double kappa_;
};

/// Polytropic gas, conserved variables (rho, m, E), entropy eta = -rho*s/(gamma-1)
/// with s = ln(p rho^-gamma).
class FullEuler : public SystemModel {
 public:
  explicit FullEuler(double gamma);

  int n() const override { return 3; }
  std::string name() const override { return "full_euler"; }
  std::map<std::string, double> params() const override;
  std::vector<std::string> component_names() const override { return {"rho", "m", "E"}; }
  std::vector<std::string> primitive_names() const override { return {"rho", "v", "p"}; }

  double gamma() const { return gamma_; }
  double pressure(const State& u) const;
  double sound_speed(const State& u) const;

 protected:
  std::optional<std::string> do_admissibility_violation(const State& u) const override;
  State do_flux(const State& u) const override;
  Matrix do_flux_jacobian(const State& u) const override;
  double do_entropy(const State& u) const override;
  State do_entropy_gradient(const State& u) const override;
  Matrix do_entropy_hessian(const State& u) const override;
  double do_entropy_flux(const State& u) const override;
  State do_char_speeds(const State& u) const override;
  Matrix do_eigenvectors(const State& u) const override;
  State do_from_primitive(const State& w) const override;
  State do_to_primitive(const State& u) const override;

 private:
  double gamma_;
};

/// The system with flux -f, i.e. the original one seen under x -> -x.
/// Same states and entropy; q -> -q; speeds negated and reordered.
class ReflectedModel : public SystemModel {
 public:
  explicit ReflectedModel(ModelPtr base);

  int n() const override { return base_->n(); }
  std::string name() const override { return "reflected_" + base_->name(); }
  std::map<std::string, double> params() const override { return base_->params(); }
  std::vector<std::string> component_names() const override { return base_->component_names(); }
  std::vector<std::string> primitive_names() const override { return base_->primitive_names(); }
  const ModelPtr& base() const { return base_; }

 protected:
  std::optional<std::string> do_admissibility_violation(const State& u) const override;
  State do_flux(const State& u) const override;
  Matrix do_flux_jacobian(const State& u) const override;
  double do_entropy(const State& u) const override;
  State do_entropy_gradient(const State& u) const override;
  Matrix do_entropy_hessian(const State& u) const override;
  double do_entropy_flux(const State& u) const override;
  State do_char_speeds(const State& u) const override;
  Matrix do_eigenvectors(const State& u) const override;
  State do_from_primitive(const State& w) const override;
  State do_to_primitive(const State& u) const override;

 private:
  ModelPtr base_;
};

/// Builds a model by name ("isentropic_euler" or "full_euler").
ModelPtr make_model(const std::string& name, double gamma, double kappa = 1.0);

// ---- relative quantities -------------------------------------------------

double relative_entropy(const SystemModel& model, const State& u, const State& v);
double relative_entropy_flux(const SystemModel& model, const State& u, const State& v);
State relative_flux(const SystemModel& model, const State& a, const State& b);
State relative_entropy_gradient(const SystemModel& model, const State& a, const State& b);

// ---- state boxes ---------------------------------------------------------

/// Axis-aligned box in primitive variables: (rho, v) or (rho, v, p).
struct StateBox {
  State lo;
  State hi;

  bool degenerate() const { return (hi - lo).cwiseAbs().maxCoeff() == 0.0; }
  bool contains_primitive(const State& w) const;
  /// Uniform in primitive variables, returned in conserved variables.
  State sample(const SystemModel& model, std::mt19937_64& rng) const;
  /// Tensor grid with k points per axis (k >= 2, or 1 for the center), conserved variables.
  StateList grid(const SystemModel& model, int k) const;
  /// Smallest box containing both, then widened by `pad` times its extent per axis.
  static StateBox hull(const SystemModel& model, const StateList& states, double pad);
  StateBox scaled(double factor) const;
};

/// Throws DomainError if any part of the box reaches the vacuum margin.
void require_admissible_box(const SystemModel& model, const StateBox& box);

// ---- certification -------------------------------------------------------

struct CompatibilityReport {
  std::size_t samples = 0;
  /// max over samples of |grad q - grad eta * grad f|_inf relative to the local magnitude
  double max_residual = 0.0;
  /// max relative mismatch between analytic and finite-difference derivatives
  double max_analytic_mismatch = 0.0;
  std::size_t non_finite = 0;
  State worst_state;
  bool pass = false;
};

inline constexpr double kCompatibilityTolerance = 1e-5;

CompatibilityReport check_compatibility(const SystemModel& model, const StateList& samples);

struct QuadraticBounds {
  double c_star = 0.0;
  double c_star_star = 0.0;
  StateBox hull;
};

QuadraticBounds quadratic_bounds(const SystemModel& model, const StateBox& box);

/// Smallest eigenvalue of the entropy Hessian at u.
double hessian_min_eigenvalue(const SystemModel& model, const State& u);

}  // namespace shiftlab

#endif

#ifndef SHIFTLAB_ERRORS_HPP
#define SHIFTLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace shiftlab {

/// Coarse error categories. They drive the CLI exit codes and the
/// "error category" entry written into run reports.
enum class ErrorCategory {
  domain,         // inadmissible state or parameter outside a model's domain
  precondition,   // caller violated an operation's precondition
  continuation,   // Hugoniot tracing failed
  solver,         // nonlinear solve (Riemann star state, Newton) failed
  vacuum,         // Riemann data would create vacuum
  simulation,     // finite-volume run lost admissibility or blew up
  trace,          // trace path left the admissible strip of the grid
  integration,    // shift path left the domain margin
  selection,      // no admissible weight a found
  construction,   // Psi construction invariant violated
  configuration,  // bad configuration or parse error
  internal,
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error(ErrorCategory::precondition, what) {}
};

class ContinuationError : public Error {
 public:
  ContinuationError(const std::string& what, double last_good_s)
      : Error(ErrorCategory::continuation, what), last_good_s_(last_good_s) {}
  double last_good_s() const noexcept { return last_good_s_; }

 private:
  double last_good_s_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(ErrorCategory::solver, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class VacuumError : public Error {
 public:
  explicit VacuumError(const std::string& what) : Error(ErrorCategory::vacuum, what) {}
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double time, long cell)
      : Error(ErrorCategory::simulation, what), time_(time), cell_(cell) {}
  double time() const noexcept { return time_; }
  long cell() const noexcept { return cell_; }

 private:
  double time_;
  long cell_;
};

class TraceError : public Error {
 public:
  explicit TraceError(const std::string& what) : Error(ErrorCategory::trace, what) {}
};

class IntegrationError : public Error {
 public:
  explicit IntegrationError(const std::string& what)
      : Error(ErrorCategory::integration, what) {}
};

class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& what) : Error(ErrorCategory::selection, what) {}
};

class ConstructionError : public Error {
 public:
  explicit ConstructionError(const std::string& what)
      : Error(ErrorCategory::construction, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::configuration, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorCategory::internal, what) {}
};

}  // namespace shiftlab

#endif

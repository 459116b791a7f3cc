#ifndef SHIFTLAB_TYPES_HPP
#define SHIFTLAB_TYPES_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace shiftlab {

/// Largest system size supported by the built-in models (full Euler).
inline constexpr int kMaxVars = 3;

/// A state in conserved variables. Stack allocated, dynamic size up to kMaxVars.
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxVars, 1>;

/// Row-major semantics are irrelevant here; Jacobians are (row = equation, col = variable).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxVars, kMaxVars>;

using StateList = std::vector<State>;

inline State make_state(std::initializer_list<double> values) {
  State u(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) u(i++) = v;
  return u;
}

inline bool all_finite(const State& u) { return u.allFinite(); }

std::string to_string(const State& u);

}  // namespace shiftlab

#endif

#ifndef SHIFTLAB_QUADRATURE_HPP
#define SHIFTLAB_QUADRATURE_HPP

#include <vector>

namespace shiftlab {

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with k points mapped to [0, 1].
const GaussRule& gauss_legendre(int k);

}  // namespace shiftlab

#endif

#include "shiftlab/quadrature.hpp"

#include "shiftlab/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace shiftlab {

namespace {

GaussRule build_rule(int k) {
  // Newton on the Legendre polynomial P_k, nodes on [-1, 1] then mapped.
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(k));
  r.weights.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto idx = static_cast<std::size_t>(k - 1 - i);
    r.nodes[idx] = 0.5 * (x + 1.0);
    r.weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int k) {
  if (k < 1 || k > 64) throw PreconditionError("gauss_legendre: k must be in [1, 64]");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, build_rule(k)).first;
  return it->second;
}

}  // namespace shiftlab

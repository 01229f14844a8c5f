#pragma once

#include <vector>

namespace klab::quad {

// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
// Nodes are ascending; weights are positive and sum to 2.
struct GaussLegendre {
  std::vector<double> node;
  std::vector<double> weight;
};

// Computed by Newton iteration on the three-term Legendre recurrence,
// started from the Chebyshev angle estimates. Accurate to ~1e-15 for the
// node counts used here (n <= a few thousand).
GaussLegendre gauss_legendre(int n);

}  // namespace klab::quad

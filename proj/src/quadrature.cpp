#include "klab/quadrature.hpp"

#include <cmath>

#include "klab/errors.hpp"

namespace klab::quad {

namespace {

// Legendre P_n(x) and P_n'(x) via the recurrence (k+1)P_{k+1} = (2k+1)xP_k - kP_{k-1}.
void legendre_pair(int n, double x, double* p, double* dp) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 1; k < n; ++k) {
    double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  *p = p1;
  *dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw validation_error("gauss_legendre: node count must be at least 1");
  if (n > 200000) throw resource_error("gauss_legendre: node count cap exceeded (parameter n)");
  GaussLegendre rule;
  rule.node.resize(n);
  rule.weight.resize(n);
  if (n == 1) {
    rule.node[0] = 0.0;
    rule.weight[0] = 2.0;
    return rule;
  }
  const double pi = 3.14159265358979323846;
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-angle initial guess for the i-th node (descending order in x).
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 64; ++it) {
      legendre_pair(n, x, &p, &dp);
      double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    legendre_pair(n, x, &p, &dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.node[n - 1 - i] = x;
    rule.weight[n - 1 - i] = w;
    rule.node[i] = -x;
    rule.weight[i] = w;
  }
  if (n % 2 == 1) rule.node[half - 1] = 0.0;
  return rule;
}

}  // namespace klab::quad

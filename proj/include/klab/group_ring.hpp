#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "klab/covers.hpp"
#include "klab/cw_surface.hpp"
#include "klab/rational.hpp"

namespace klab::l2 {

// An integer Laurent polynomial in d commuting variables: finitely supported
// map from exponent vectors (length d) to nonzero integer coefficients.
using Exponent = std::vector<std::int64_t>;
using LaurentPoly = std::map<Exponent, std::int64_t>;

// Matrix over the group ring Z[Z^d]. Entries absent from the map are zero.
struct GroupRingMatrix {
  int rank_d = 1;
  int rows = 0;
  int cols = 0;
  std::map<std::pair<int, int>, LaurentPoly> entries;

  GroupRingMatrix() = default;
  GroupRingMatrix(int d, int m, int n) : rank_d(d), rows(m), cols(n) {}

  // Accumulates coef * t^exp into entry (r, c); cancelling terms are erased.
  void add_term(int r, int c, Exponent exp, std::int64_t coef);
  const LaurentPoly* entry(int r, int c) const;
};

void validate(const GroupRingMatrix& f);

// Finite abelian quotient Z^d -> prod Z/moduli[i].
struct Quotient {
  std::vector<std::int64_t> moduli;
  std::int64_t order() const;
};

void validate_quotient(const GroupRingMatrix& f, const Quotient& q);

// One complex matrix per character of the quotient (variable i evaluated at
// the k_i-th power of the n_i-th root of unity). Characters are indexed in
// mixed radix with the first coordinate fastest; their direct sum is
// unitarily equivalent to the finite-quotient matrix in the permutation
// basis.
std::vector<Eigen::MatrixXcd> specialize(const GroupRingMatrix& f, const Quotient& q);

// dim_C ker of the finite-quotient matrix, computed two independent ways:
// exact integer rank in the permutation basis, and summed numerical kernel
// dims of the character evaluations (singular values below
// 1e-8 * (sigma_max + 1) count as zero). Disagreement throws
// consistency_error: the exact route is the ground truth and a mismatch
// means the float tolerance is wrong, not the data.
std::int64_t kernel_dim_finite(const GroupRingMatrix& f, const Quotient& q);

struct LueckRecord {
  int level = 0;           // 1-based position in the tower
  std::int64_t degree = 1; // quotient order / covering degree
  std::int64_t dim = 0;    // exact kernel dimension or Betti number
  Rational normalized;     // dim / degree, exact
};

struct LueckSequence {
  std::vector<LueckRecord> records;
  std::optional<Rational> limit;  // attached when the theory names it
};

// Normalized kernel dimensions along a nested tower of finite quotients
// (componentwise divisibility chain required).
LueckSequence lueck_kernel_sequence(const GroupRingMatrix& f,
                                    const std::vector<Quotient>& tower);

// Von Neumann kernel dimension over Z^d via the torus integral
// dim ker = integral of the pointwise corank of the evaluated symbol.
struct VNDimEstimate {
  double value = 0.0;
  std::string method;  // "closed-form" (constant symbol) or "quadrature"
  std::int64_t nodes = 0;
  double error_bound = 0.0;
  // Grid nodes whose corank differs from the majority corank. For a nonzero
  // polynomial symbol the rank-drop locus has measure zero, so these are
  // the quadrature's entire error budget.
  std::int64_t degenerate_nodes = 0;
};

// Uniform-grid sampling of the symbol on the d-torus, d <= 2. Deterministic
// node order; per-node singular-value threshold as in kernel_dim_finite.
VNDimEstimate vn_kernel_dim_fourier(const GroupRingMatrix& f,
                                    std::int64_t nodes_per_circle = 4096);

// Normalized Betti numbers b^p(X_k)/deg(X_k) along a cover tower of the
// one-vertex genus-g base. When the tower declares an infinite free-abelian
// limit, attaches the limiting value: 2g-2 for p = 1, zero for p = 0, 2.
LueckSequence lueck_betti_sequence(const complexes::CWSurface& base,
                                   const covers::TowerSpec& tower, int p);

// JSON: {rank_d, rows, cols, entries:[{r,c,terms:[{exp:[..],coef},..]},..]}
std::string to_json(const GroupRingMatrix& f);
GroupRingMatrix group_ring_from_json(const std::string& text);

// CSV columns level,degree,dim,normalized_num,normalized_den; a trailing
// "# limit <num>/<den>" comment line when a limit is attached.
std::string lueck_csv(const LueckSequence& seq);

}  // namespace klab::l2

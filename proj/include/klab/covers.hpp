#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klab/cw_surface.hpp"

namespace klab::covers {

// Finite group given by its full multiplication table; elements are ids
// 0..order-1. table[g*order + h] is the product g*h.
struct FiniteGroupTable {
  int order = 0;
  int identity = 0;
  std::vector<int> table;
  std::vector<int> inverse;

  int mul(int g, int h) const { return table[std::size_t(g) * order + h]; }
  int inv(int g) const { return inverse[g]; }
};

FiniteGroupTable cyclic_group(int n);

// Direct power (Z/n)^k with mixed-radix element ids (coordinate 0 is the
// least significant digit). Guarded by the element cap.
FiniteGroupTable abelian_power(int n, int k, int cap = 10000);

// Identity and inverse laws exhaustively; associativity exhaustively for
// order <= 64, otherwise on at least 10*order^2 seeded random triples.
void validate(const FiniteGroupTable& q, std::uint64_t seed = 12345);

// Epimorphism pi_1(genus-g surface) -> Q given by one image per generator
// edge a_1,b_1,...,a_g,b_g.
struct CoverSpec {
  FiniteGroupTable group;
  std::vector<int> images;
};

// Checks the group table, that the surface relator maps to the identity,
// and that the images generate the group.
void validate_for_genus(const CoverSpec& spec, int genus);

struct BuiltCover {
  complexes::CWSurface complex;
  FiniteGroupTable group;
  std::vector<int> images;
  int degree = 0;
  int base_genus = 0;

  // Cell indexing: vertex q is deck element q; the lift of base edge e
  // starting at vertex q has index e*degree + q; face q starts its relator
  // walk at vertex q.
  int edge_lift(int base_edge, int deck) const {
    return base_edge * degree + deck;
  }
  // Permutation of cover edges induced by left translation by h.
  std::vector<int> edge_permutation(int h) const;
};

// Builds the covering complex of the one-vertex genus-g base associated to
// the epimorphism: vertices are deck elements, the lift of edge e at q runs
// from q to q*image(e), and face q's word walks the base relator tracking
// the running deck prefix. Requires the base to be the one-vertex complex.
BuiltCover build_cover(const complexes::CWSurface& base, const CoverSpec& spec);

// Single-generator cyclic quotient: the chosen generator edge maps to 1 in
// Z/n, every other generator to 0.
CoverSpec cyclic_cover_spec(int g, int n, int generator = 0);

// Full homology quotient mod n: Q = (Z/n)^(2g), generator i maps to the
// i-th coordinate unit. Degree n^(2g), guarded by the element cap.
CoverSpec homology_cover_spec(int g, int n, int cap = 10000);

// Tower of nested covers. connecting[k] maps element ids of level k+1's
// group onto level k's and must be a surjective homomorphism compatible
// with the generator images. declared_limit names the limiting deck group
// ("Z", "Z^d", or "other"); when it is a free abelian group, limit_rank is
// its rank and limit_weights (2g rows) gives the generator weights there.
struct TowerSpec {
  std::vector<CoverSpec> levels;
  std::vector<std::vector<int>> connecting;
  std::string declared_limit = "other";
  int limit_rank = 0;
  std::vector<std::vector<int>> limit_weights;
};

void validate(const TowerSpec& t, int genus, std::uint64_t seed = 12345);

// Single-generator cyclic tower: quotients Z/n for a divisibility chain of
// moduli, connecting maps reduce mod the smaller modulus. Limit Z.
TowerSpec cyclic_tower(int g, const std::vector<int>& moduli, int generator = 0);

// Total-degree cyclic tower: every generator maps to 1 in Z/n. Limit Z with
// all generator weights 1.
TowerSpec full_cyclic_tower(int g, const std::vector<int>& moduli);

// Homology mod-n tower along a divisibility chain; limit Z^(2g) with the
// identity weight matrix.
TowerSpec homology_tower(int g, const std::vector<int>& moduli, int cap = 10000);

std::string cover_spec_to_json(const CoverSpec& spec);
CoverSpec cover_spec_from_json(const std::string& text, int genus);
std::string tower_to_json(const TowerSpec& t);
TowerSpec tower_from_json(const std::string& text, int genus);

}  // namespace klab::covers

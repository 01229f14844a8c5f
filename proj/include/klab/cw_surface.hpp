#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "klab/exact_linalg.hpp"

namespace klab::complexes {

struct Edge {
  int src = 0;
  int tgt = 0;
};

// One signed step of an attaching word: edge index plus traversal direction.
struct SignedEdge {
  int edge = 0;
  int sign = 1;
};

// Optional provenance for cells of a covering complex: for each cell, the
// base cell under it and the deck element indexing the lift.
struct CellLabels {
  std::vector<std::array<int, 2>> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 2>> faces;
};

// Closed orientable surface as a CW complex. Vertices are implicit ids
// 0..vertex_count-1; every face carries its attaching word as a closed
// signed edge path.
struct CWSurface {
  int genus = 0;
  int vertex_count = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<SignedEdge>> faces;
  std::optional<CellLabels> labels;
};

// Coboundary matrices in the standard cell bases.
struct BoundaryMaps {
  IntMatrix d0;  // edges x vertices: +1 at the target, -1 at the source
  IntMatrix d1;  // faces x edges: signed occurrence counts along the word
};

struct BettiVector {
  int b0 = 0;
  int b1 = 0;
  int b2 = 0;
};

// Standard one-vertex structure of the closed orientable genus-g surface:
// 2g loop edges a_1,b_1,...,a_g,b_g (edge 2i is a_{i+1}, edge 2i+1 is
// b_{i+1}) and a single face attached along the product of commutators,
// word length 4g. Requires g >= 1.
CWSurface genus_surface_complex(int g);

// Conventional display names for the generator edges of the one-vertex
// complex: "a1", "b1", ...
std::vector<std::string> generator_edge_names(int g);

// Structural validation: nonempty closed face words, edge indices in
// range, connected 1-skeleton, Euler characteristic 2-2*genus, and
// d1 * d0 = 0. Throws validation_error with a description on failure.
void validate(const CWSurface& s);

int euler_characteristic(const CWSurface& s);

BoundaryMaps boundary_matrices(const CWSurface& s);

// Betti numbers over Q by rank-nullity on exact coboundary ranks.
BettiVector betti_numbers(const CWSurface& s);

std::string to_json(const CWSurface& s);
CWSurface surface_from_json(const std::string& text);

}  // namespace klab::complexes

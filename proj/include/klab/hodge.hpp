#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "klab/covers.hpp"
#include "klab/cw_surface.hpp"

namespace klab::hodge {

// Orthogonal projector onto the harmonic 1-cochains ker d1 ∩ ker (d0)^T of
// the combinatorial Hodge Laplacian, standard cochain basis orthonormal.
// rank equals b1 of the complex; the eigen-decomposition is cross-checked
// against the exact Betti number and a mismatch throws.
struct HarmonicProjector {
  Eigen::MatrixXd p;
  int rank = 0;
};

HarmonicProjector harmonic_projector(const complexes::CWSurface& c);

// Nonnegative weight per edge; total is their sum. The canonical measure of
// an edge set A is the sum of its entries (trace formula over indicator
// cochains).
struct EdgeMeasure {
  std::vector<double> value;
  double total = 0.0;
};

// Edge e gets P_ee / 2; total = b1 / 2 (= g for the one-vertex genus-g
// complex).
EdgeMeasure canonical_edge_measure(const complexes::CWSurface& c);

// Canonical measure of the cover pushed to the base: base edge e gets the
// common value of its lifts (averaged; a spread beyond 1e-9 across lifts
// throws consistency_error). Total = b1(cover)/(2d) = (g-1) + 1/d.
EdgeMeasure pushforward_measure(const complexes::CWSurface& base,
                                const covers::CoverSpec& spec);

// Diagonal of the harmonic projector of the cochain complex twisted by the
// character theta of the infinite abelian deck group: d0 becomes the column
// (z^{w_e} - 1)_e and d1 the relator row with running deck weights. Handles
// rank drops (e.g. theta = 0, where the projector is the identity).
Eigen::VectorXd twisted_projector_diagonal(
    int g, const std::vector<std::vector<int>>& weights,
    const std::vector<double>& theta);

struct FourierMeasure {
  EdgeMeasure measure;
  std::int64_t nodes = 0;      // grid nodes kept
  std::int64_t discarded = 0;  // rank-jump nodes excluded from the average
};

// Limit measure of the infinite abelian cover with the given generator
// weights (2g rows, d columns, d in {1,2}; the weights must define a
// surjection onto Z^d): per edge, half the torus average of the twisted
// projector diagonal over a uniform grid, rank-jump nodes discarded.
// Defaults: 2048 nodes for d = 1, 256 per circle for d = 2.
FourierMeasure fourier_limit_measure(int g,
                                     const std::vector<std::vector<int>>& weights,
                                     std::int64_t nodes_per_circle = 0);

struct ConvergenceReport {
  std::vector<std::int64_t> degrees;
  std::vector<EdgeMeasure> levels;        // pushforward measure per level
  std::vector<double> successive_sup;     // sup-norm gap between consecutive levels
  std::vector<double> totals;             // = (g-1) + 1/degree
  std::optional<EdgeMeasure> limit;       // exact Fourier limit when deck is Z or Z^2
  std::int64_t limit_nodes = 0;
  std::int64_t limit_discarded = 0;
};

ConvergenceReport measure_convergence_experiment(const complexes::CWSurface& base,
                                                 const covers::TowerSpec& tower);

// CSV columns edge_id,label,value.
std::string measure_csv(const EdgeMeasure& m, const std::vector<std::string>& labels);

// JSON with per-level arrays and an optional limit block.
std::string report_json(const ConvergenceReport& r,
                        const std::vector<std::string>& labels);

}  // namespace klab::hodge

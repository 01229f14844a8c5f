#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace klab::curves {

using Complex = std::complex<double>;

// A hyperelliptic curve y^2 = f(x) given by the coefficients of f.
// coefficients[k] multiplies x^k; the leading coefficient is nonzero and the
// finite branch points (roots of f) are pairwise distinct. Odd degree adds a
// branch point at infinity. genus = ceil(degree/2) - 1.
struct HyperellipticCurve {
  std::vector<Complex> coefficients;
  int degree = 0;
  int genus = 0;
  std::vector<Complex> branch_points;
  bool infinite_branch_point = false;
};

// Validates the coefficient list, finds the branch points (companion-matrix
// eigenvalues polished by Newton), and rejects curves with repeated roots
// (minimum root separation 1e-8 relative to the root scale).
HyperellipticCurve make_curve(std::vector<Complex> coefficients);

// f(x) by Horner evaluation.
Complex evaluate(const HyperellipticCurve& c, Complex x);

// Periods of the holomorphic differentials x^{i-1} dx / y, i = 1..g, over an
// explicit homology basis.
//
// The integration model always has even degree: odd-degree curves are first
// moved to one by the substitution x = c0 + 1/xi (c0 a deterministic point
// away from the roots), which makes every branch point finite; the row
// transform back to the x^{i-1} dx / y basis is applied to the result.
//
// The model branch points are ordered by angle (then modulus) around their
// centroid and joined pairwise by branch cuts: cut j runs from
// model_points[2j] to model_points[2j+1]. Cycle m (m = 0..2g-1) is a thin
// loop around the segment from model_points[m] to model_points[m+1]: even m
// encircles cut m/2, odd m encircles the gap between consecutive cuts, and
// cycles[m] stores that ordered pair of cut indices. Each period is computed
// as 2x the segment integral of the global square-root branch, with the
// endpoint inverse-square-root singularities removed analytically by the
// sin substitution before Gauss-Legendre quadrature.
struct PeriodData {
  std::vector<Complex> model_points;
  int cut_count = 0;
  std::vector<std::array<int, 2>> cycles;
  Eigen::MatrixXi intersection;  // 2g x 2g intersection numbers of the cycles
  Eigen::MatrixXcd periods;      // g x 2g; row i-1 = periods of x^{i-1} dx / y
  int nodes = 0;                 // nodes per segment actually used (after doubling)
  double doubling_rel_change = 0.0;
};

// nodes >= 32. The result is recomputed with doubled nodes; relative change
// above 1e-6 raises precision_error, and the doubled result is returned.
PeriodData periods(const HyperellipticCurve& c, int nodes = 64);

// Hodge inner products G_ij = (omega_i, omega_j) = (i/2) int omega_i ^ conj(omega_j),
// assembled from the periods and the cycle intersection matrix via the
// bilinear relations. Hermitian positive definite by construction; a non-PD
// or non-Hermitian result means an orientation/convention bug and raises
// consistency_error.
struct GramMatrix {
  Eigen::MatrixXcd m;
  double hermitian_defect = 0.0;  // max |G - G^H| entry before symmetrization
  double min_eigenvalue = 0.0;
};

GramMatrix hodge_gram(const HyperellipticCurve& c, const PeriodData& p);

// Canonical (Bergman) density against Lebesgue measure of the x-chart on one
// sheet: rho(x) = sum_ij (G^{-1})_{ji} a_i(x) conj(a_j(x)) with
// a_i = x^{i-1}/y. The value is sheet-independent (the phase of y cancels);
// the sheet argument is accepted for interface symmetry and must be +-1.
// Evaluation within 1e-6 of a branch point is rejected.
double canonical_density(const HyperellipticCurve& c, const GramMatrix& G,
                         Complex x, int sheet = 1);

// Total canonical mass 2 * int_C rho dA (both sheets), by polar quadrature
// around the root centroid with the integrable 1/|x - p| branch-point peaks
// subtracted analytically, plus an explicit tail bound for the disk
// complement. Tail bound above 1e-3 after radius growth raises
// precision_error. The value equals the genus for a correct Gram matrix.
struct MassReport {
  double value = 0.0;
  double radius = 0.0;
  int radial_nodes = 0;
  int angular_nodes = 0;
  double tail_bound = 0.0;
  double doubling_rel_change = 0.0;  // change when the grid is refined 2x
};

MassReport total_mass(const HyperellipticCurve& c, const GramMatrix& G,
                      int radial_nodes = 192, int threads = 1);

// Canonical measure of an axis-aligned rectangle in the x-chart, counting
// `sheets` sheets (1 or 2). Every branch point must be at distance >= 1e-4
// from the rectangle boundary; branch points inside the rectangle are fine
// (their peaks are subtracted and integrated in closed form). Deterministic
// panel-splitting Gauss-Legendre quadrature.
double measure_of_rectangle(const HyperellipticCurve& c, const GramMatrix& G,
                            double re_lo, double re_hi, double im_lo,
                            double im_hi, int sheets = 2);

// Samples `trials` random coefficient vectors of unit Hodge norm and checks
// the pointwise extremal property |a_phi(x)|^2 <= rho(x), plus that the
// closed-form optimizer achieves rho(x).
struct ExtremalReport {
  int trials = 0;
  double max_sample_ratio = 0.0;  // max over trials of |a_phi(x)|^2 / rho(x)
  double optimal_ratio = 0.0;     // achieved by the closed-form optimizer
  bool bound_violated = false;    // a sample exceeded rho beyond 1e-9 slack
  bool optimum_missed = false;    // optimizer fell short of (1 - 1e-6) rho
};

ExtremalReport extremal_check(const HyperellipticCurve& c, const GramMatrix& G,
                              Complex x, int trials,
                              std::uint64_t seed = 20240818);

// JSON: {"coefficients": [[re, im], ...]} ascending in the power of x.
std::string to_json(const HyperellipticCurve& c);
HyperellipticCurve curve_from_json(const std::string& text);

// CSV "re,im,rho" with one row per sample point.
std::string density_csv(const HyperellipticCurve& c, const GramMatrix& G,
                        const std::vector<Complex>& samples);
std::string mass_report_json(const MassReport& r);

}  // namespace klab::curves

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace klab::disk {

// Canonical density of the unit disk in the convention eta = (i/2) rho dz^dzbar:
// rho(z) = 2 / (pi (1 - |z|^2)^2). Requires |z| < 1.
double density(std::complex<double> z);

// Partial sum of the defining series, (2/pi) sum_{n < terms} (n+1) |z|^{2n}.
// terms >= 1; requires |z| < 1.
double density_partial(std::complex<double> z, int terms);

// Canonical density of the subdisk D_r = {|z| < r}: the unit-disk form
// rescaled, (2/(pi r^2)) (1 - |z/r|^2)^{-2}. Requires |z| < r, 0 < r < 1.
double subdisk_density(std::complex<double> z, double r);

// mu(D_radius) for the unit-disk canonical measure, by radial quadrature of
// the closed form. Requires 0 <= radius < 1. (Closed form: 2 r^2 / (1 - r^2).)
double measure_of_centered_disk(double radius);

// Grid-based checks of the disk model, all on deterministic lattices:
//  - pinned values at the origin and mu(D_{1/2});
//  - subdisk density dominates the disk density pointwise (min excess >= 0);
//  - subdisk densities converge down to the disk density as r -> 1
//    (per-radius sup deviation on a fixed |z| <= 0.45 grid);
//  - Moebius invariance rho(m(z)) |m'(z)|^2 = rho(z) for seeded random
//    parameters m(z) = (z - a) / (1 - conj(a) z);
//  - uniform convergence of the partial sums on |z| <= 1/2, with a common
//    empirical Lipschitz bound across all truncation orders.
struct ModelChecks {
  double density_at_zero = 0.0;       // 2/pi
  double subdisk_half_at_zero = 0.0;  // 8/pi
  double measure_half = 0.0;          // 2/3
  double min_subdisk_excess = 0.0;
  std::vector<double> radii;
  std::vector<double> exhaustion_sup;  // per radius
  double moebius_max_dev = 0.0;
  std::vector<int> truncation_terms;
  std::vector<double> truncation_sup;  // per truncation order, |z| <= 1/2 grid
  double lipschitz_bound = 0.0;        // common bound across truncations
};

// radii: ascending, each in [1/2, 1); grid: lattice resolution per axis
// (grid x grid points spanning [-0.9, 0.9]^2, filtered per check).
ModelChecks model_checks(const std::vector<double>& radii, int grid,
                         int moebius_params = 10,
                         std::uint64_t seed = 20240818);

std::string model_checks_json(const ModelChecks& c);

}  // namespace klab::disk

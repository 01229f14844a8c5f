#include "klab/disk.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "klab/errors.hpp"
#include "klab/quadrature.hpp"

namespace klab::disk {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_inside_unit(std::complex<double> z) {
  if (std::abs(z) >= 1.0)
    throw validation_error("disk density: point outside the open unit disk");
}
}  // namespace

double density(std::complex<double> z) {
  require_inside_unit(z);
  double t = 1.0 - std::norm(z);
  return 2.0 / (kPi * t * t);
}

double density_partial(std::complex<double> z, int terms) {
  require_inside_unit(z);
  if (terms < 1) throw validation_error("density_partial: need at least one term");
  if (terms > 1000000)
    throw resource_error("density_partial: term cap exceeded (parameter terms)");
  double q = std::norm(z);
  double sum = 0.0;
  double pw = 1.0;
  for (int n = 0; n < terms; ++n) {
    sum += double(n + 1) * pw;
    pw *= q;
  }
  return 2.0 / kPi * sum;
}

double subdisk_density(std::complex<double> z, double r) {
  if (!(r > 0.0 && r < 1.0))
    throw validation_error("subdisk_density: radius must lie in (0, 1)");
  if (std::abs(z) >= r)
    throw validation_error("subdisk_density: point outside the subdisk");
  double t = 1.0 - std::norm(z / r);
  return 2.0 / (kPi * r * r * t * t);
}

double measure_of_centered_disk(double radius) {
  if (!(radius >= 0.0 && radius < 1.0))
    throw validation_error("measure_of_centered_disk: radius must lie in [0, 1)");
  if (radius == 0.0) return 0.0;
  // int_0^radius rho(r) 2 pi r dr, rho radial; 64 nodes are far beyond
  // sufficient for this analytic integrand away from r = 1.
  quad::GaussLegendre rule = quad::gauss_legendre(64);
  double sum = 0.0;
  for (size_t k = 0; k < rule.node.size(); ++k) {
    double r = 0.5 * (rule.node[k] + 1.0) * radius;
    double t = 1.0 - r * r;
    sum += rule.weight[k] * 0.5 * radius * (2.0 / (kPi * t * t)) * 2.0 * kPi * r;
  }
  return sum;
}

ModelChecks model_checks(const std::vector<double>& radii, int grid,
                         int moebius_params, std::uint64_t seed) {
  if (radii.empty()) throw validation_error("model_checks: at least one radius required");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.5 && radii[i] < 1.0))
      throw validation_error("model_checks: radii must lie in [1/2, 1)");
    if (i > 0 && radii[i] <= radii[i - 1])
      throw validation_error("model_checks: radii must be strictly increasing");
  }
  if (grid < 4) throw validation_error("model_checks: grid must be at least 4");
  if (grid > 4096) throw resource_error("model_checks: grid cap exceeded (parameter grid)");
  if (moebius_params < 1 || moebius_params > 10000)
    throw validation_error("model_checks: moebius_params must lie in [1, 10000]");

  ModelChecks out;
  out.density_at_zero = density(0.0);
  out.subdisk_half_at_zero = subdisk_density(0.0, 0.5);
  out.measure_half = measure_of_centered_disk(0.5);
  out.radii = radii;

  std::vector<std::complex<double>> lattice;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      double x = -0.9 + 1.8 * double(a) / double(grid - 1);
      double y = -0.9 + 1.8 * double(b) / double(grid - 1);
      lattice.emplace_back(x, y);
    }

  // Exhaustion on a fixed window inside every subdisk.
  for (double r : radii) {
    double sup = 0.0;
    for (const auto& z : lattice)
      if (std::abs(z) < 0.45)
        sup = std::max(sup, subdisk_density(z, r) - density(z));
    out.exhaustion_sup.push_back(sup);
  }
  // Domination on the whole of each subdisk.
  out.min_subdisk_excess = 1e300;
  for (double r : radii)
    for (const auto& z : lattice)
      if (std::abs(z) < r)
        out.min_subdisk_excess =
            std::min(out.min_subdisk_excess, subdisk_density(z, r) - density(z));

  // Moebius invariance on seeded parameters.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double dev = 0.0;
  for (int t = 0; t < moebius_params; ++t) {
    double rad = 0.9 * std::sqrt(unif(rng));
    double ang = 2.0 * kPi * unif(rng);
    std::complex<double> a = std::polar(rad, ang);
    for (const auto& z : lattice) {
      if (std::abs(z) > 0.9) continue;
      std::complex<double> denom = 1.0 - std::conj(a) * z;
      std::complex<double> m = (z - a) / denom;
      double dm = (1.0 - std::norm(a)) / std::norm(denom);  // |m'(z)|
      dev = std::max(dev, std::abs(density(m) * dm * dm - density(z)));
    }
  }
  out.moebius_max_dev = dev;

  // Uniform convergence of partial sums on |z| <= 1/2, plus a common
  // empirical Lipschitz bound: the radial derivative of every partial sum is
  // dominated by the full-series derivative, evaluated termwise at s = 1/2.
  out.truncation_terms = {5, 10, 20, 40, 60};
  for (int terms : out.truncation_terms) {
    double sup = 0.0;
    for (const auto& z : lattice) {
      if (std::abs(z) > 0.5) continue;
      sup = std::max(sup, std::abs(density_partial(z, terms) - density(z)));
    }
    out.truncation_sup.push_back(sup);
  }
  double lip = 0.0;
  for (int n = 1; n < 200; ++n)
    lip += 2.0 / kPi * double(n + 1) * 2.0 * double(n) * std::pow(0.5, 2 * n - 1);
  out.lipschitz_bound = lip;

  return out;
}

std::string model_checks_json(const ModelChecks& c) {
  nlohmann::json j;
  j["density_at_zero"] = c.density_at_zero;
  j["subdisk_half_at_zero"] = c.subdisk_half_at_zero;
  j["measure_half"] = c.measure_half;
  j["min_subdisk_excess"] = c.min_subdisk_excess;
  j["radii"] = c.radii;
  j["exhaustion_sup"] = c.exhaustion_sup;
  j["moebius_max_dev"] = c.moebius_max_dev;
  j["truncation_terms"] = c.truncation_terms;
  j["truncation_sup"] = c.truncation_sup;
  j["lipschitz_bound"] = c.lipschitz_bound;
  return j.dump(2);
}

}  // namespace klab::disk

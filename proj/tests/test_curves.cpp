#include "klab/curves.hpp"

#include <cmath>
#include <complex>

#include "doctest.h"
#include "klab/errors.hpp"

namespace cv = klab::curves;
using Complex = cv::Complex;

namespace {

constexpr double kPi = 3.14159265358979323846;

cv::HyperellipticCurve lemniscatic() {  // y^2 = x^3 - x
  return cv::make_curve({{0, 0}, {-1, 0}, {0, 0}, {1, 0}});
}
cv::HyperellipticCurve quintic() {  // y^2 = x^5 - 1
  return cv::make_curve({{-1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 0}});
}
cv::HyperellipticCurve sextic() {  // y^2 = x^6 - 1
  return cv::make_curve({{-1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 0}});
}

// Lemniscate constant 2*varpi via the arithmetic-geometric mean:
// K(1/sqrt_2) = pi / (2 AGM(1, 1/sqrt_2)), varpi = sqrt_2 K(1/sqrt_2).
double two_varpi() {
  double a = 1.0, b = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 8; ++i) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  double K = kPi / (2.0 * a);
  return 2.0 * std::sqrt(2.0) * K;
}

// Independent contour oracle: integrate xi^power dxi / y around a rectangle,
// tracking the branch of y = sqrt(f(xi)) by continuity along the path. Knows
// nothing about the cut bookkeeping inside periods().
Complex tracked_contour_integral(const cv::HyperellipticCurve& c, Complex a,
                                 Complex b, double widen, int power, int steps) {
  Complex mid = (a + b) / 2.0;
  Complex half = (b - a) / 2.0;
  Complex lat = Complex(0, 1) * half * widen;
  Complex lon = half * (1.0 + widen);
  std::vector<Complex> corners = {mid - lon - lat, mid + lon - lat,
                                  mid + lon + lat, mid - lon + lat};
  std::vector<Complex> path;
  for (int e = 0; e < 4; ++e) {
    Complex from = corners[size_t(e)], to = corners[size_t((e + 1) % 4)];
    for (int s = 0; s < steps; ++s)
      path.push_back(from + (to - from) * (double(s) / steps));
  }
  path.push_back(path.front());

  Complex integral = 0.0;
  Complex prev_y = std::sqrt(cv::evaluate(c, path[0]));
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    Complex z0 = path[k], z1 = path[k + 1];
    Complex zm = (z0 + z1) / 2.0;
    auto branch = [&](Complex z) {
      Complex y = std::sqrt(cv::evaluate(c, z));
      if (std::abs(y - prev_y) > std::abs(y + prev_y)) y = -y;
      prev_y = y;
      return y;
    };
    Complex ym = branch(zm);
    integral += std::pow(zm, power) / ym * (z1 - z0);
    prev_y = ym;
    Complex y1 = branch(z1);
    prev_y = y1;
  }
  // Closing the loop must return to the starting branch (trivial monodromy).
  Complex y_back = std::sqrt(cv::evaluate(c, path[0]));
  if (std::abs(y_back - prev_y) > std::abs(y_back + prev_y)) y_back = -y_back;
  REQUIRE(std::abs(y_back - std::sqrt(cv::evaluate(c, path[0]))) <
          1e-9 * (1.0 + std::abs(y_back)));
  return integral;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("curve construction: degree, genus, branch points") {
  auto c3 = lemniscatic();
  CHECK(c3.degree == 3);
  CHECK(c3.genus == 1);
  CHECK(c3.infinite_branch_point);
  REQUIRE(c3.branch_points.size() == 3);
  double hit = 0;
  for (const auto& p : c3.branch_points)
    for (double r : {-1.0, 0.0, 1.0})
      if (std::abs(p - Complex(r, 0)) < 1e-12) hit += 1;
  CHECK(hit == 3);

  auto c5 = quintic();
  CHECK(c5.genus == 2);
  CHECK(c5.infinite_branch_point);
  for (const auto& p : c5.branch_points) CHECK(std::abs(std::abs(p) - 1.0) < 1e-12);

  auto c6 = sextic();
  CHECK(c6.genus == 2);
  CHECK_FALSE(c6.infinite_branch_point);
  for (const auto& p : c6.branch_points)
    CHECK(std::abs(cv::evaluate(c6, p)) < 1e-10);
}

TEST_CASE("curve construction: rejections") {
  CHECK_THROWS_AS(cv::make_curve({{1, 0}, {0, 0}, {1, 0}}), klab::validation_error);
  CHECK_THROWS_AS(cv::make_curve({{0, 0}, {0, 0}, {0, 0}, {0, 0}}), klab::validation_error);
  // (x-1)^2 (x-2) = x^3 - 4x^2 + 5x - 2: repeated branch point
  CHECK_THROWS_AS(cv::make_curve({{-2, 0}, {5, 0}, {-4, 0}, {1, 0}}), klab::validation_error);
  // leading coefficient zero
  CHECK_THROWS_AS(cv::make_curve({{1, 0}, {2, 0}, {1, 0}, {0, 0}}), klab::validation_error);
  std::vector<Complex> huge(70, Complex(1, 0));
  CHECK_THROWS_AS(cv::make_curve(huge), klab::resource_error);
}

TEST_CASE("lemniscatic periods match the AGM lattice") {
  auto c = lemniscatic();
  cv::PeriodData p = cv::periods(c, 64);
  REQUIRE(p.periods.rows() == 1);
  REQUIRE(p.periods.cols() == 2);
  CHECK(p.nodes == 128);
  CHECK(p.doubling_rel_change < 1e-9);

  double om = two_varpi();  // lattice is om (Z + iZ)
  Complex pi1 = p.periods(0, 0), pi2 = p.periods(0, 1);

  // Both periods are lattice points...
  Complex g1 = pi1 / om, g2 = pi2 / om;
  long a1 = std::lround(g1.real()), b1 = std::lround(g1.imag());
  long a2 = std::lround(g2.real()), b2 = std::lround(g2.imag());
  CHECK(std::abs(g1 - Complex(double(a1), double(b1))) < 1e-9);
  CHECK(std::abs(g2 - Complex(double(a2), double(b2))) < 1e-9);
  // ...forming a unimodular basis (the cycles are a homology basis)...
  CHECK(std::abs(a1 * b2 - a2 * b1) == 1);
  // ...with the orientation the positive-definite Gram convention demands.
  CHECK((pi2 / pi1).imag() > 0);
  // Covolume equals the AGM value exactly (to quadrature precision).
  double covol = std::abs((std::conj(pi1) * pi2).imag());
  CHECK(covol == doctest::Approx(om * om).epsilon(1e-12));
}

TEST_CASE("independent branch-tracked contour oracle: x^6 - 1") {
  auto c = sextic();
  cv::PeriodData p = cv::periods(c, 64);

  // Cycle 0 surrounds cut 0 = [Q0, Q1]; cycle 1 surrounds the gap [Q1, Q2].
  for (int m : {0, 1}) {
    Complex a = p.model_points[size_t(m)];
    Complex b = p.model_points[size_t(m + 1)];
    for (int power : {0, 1}) {
      Complex oracle = tracked_contour_integral(c, a, b, 0.35, power, 20000);
      Complex mine = p.periods(power, m);
      double scale = 1.0 + std::abs(mine);
      double match = std::min(std::abs(oracle - mine), std::abs(oracle + mine));
      CHECK(match < 1e-6 * scale);
    }
  }
}

TEST_CASE("period data structure") {
  auto c = quintic();
  cv::PeriodData p = cv::periods(c, 48);
  CHECK(p.cut_count == 3);
  REQUIRE(p.cycles.size() == 4);
  CHECK(p.cycles[0] == std::array<int, 2>{0, 0});
  CHECK(p.cycles[1] == std::array<int, 2>{0, 1});
  CHECK(p.cycles[2] == std::array<int, 2>{1, 1});
  CHECK(p.cycles[3] == std::array<int, 2>{1, 2});
  REQUIRE(p.intersection.rows() == 4);
  CHECK(p.intersection == -p.intersection.transpose());
  CHECK(std::abs(p.intersection.cast<double>().determinant() - 1.0) < 1e-9);
  CHECK(p.model_points.size() == 6);  // five finite images + the moved infinity

  CHECK_THROWS_AS(cv::periods(c, 16), klab::validation_error);
  CHECK_THROWS_AS(cv::periods(c, 1 << 20), klab::resource_error);
}

TEST_CASE("quadrature is already converged at the default node count") {
  auto c = sextic();
  cv::PeriodData coarse = cv::periods(c, 32);
  cv::PeriodData fine = cv::periods(c, 96);
  CHECK(max_abs(coarse.periods - fine.periods) < 1e-9 * (1.0 + max_abs(fine.periods)));
}

TEST_CASE("Gram matrices: Hermitian positive definite, symmetry-forced shape") {
  for (auto curve : {quintic(), sextic()}) {
    cv::PeriodData p = cv::periods(curve, 64);
    cv::GramMatrix G = cv::hodge_gram(curve, p);
    CHECK(G.hermitian_defect < 1e-9 * (1.0 + max_abs(G.m)));
    CHECK(G.min_eigenvalue > 0.0);
    // The rotation symmetry of both curves forces a diagonal Gram matrix.
    CHECK(std::abs(G.m(0, 1)) < 1e-8 * std::abs(G.m(0, 0)));
    CHECK(G.m(0, 0).real() > 0.0);
    CHECK(G.m(1, 1).real() > 0.0);
  }
}

TEST_CASE("rotation transport of x^6 - 1 periods") {
  auto c = sextic();
  cv::PeriodData p = cv::periods(c, 64);
  Complex zeta = std::polar(1.0, kPi / 3.0);

  // The angular ordering of the sixth roots of unity advances by zeta.
  for (size_t m = 0; m + 1 < p.model_points.size(); ++m)
    CHECK(std::abs(p.model_points[m + 1] - zeta * p.model_points[m]) < 1e-9);

  // Rotating a segment multiplies the period of x^{i-1} dx / y by zeta^i up
  // to one sign shared by every row.
  for (int m = 0; m + 1 < 4; ++m) {
    Complex r1 = p.periods(0, m + 1) / (zeta * p.periods(0, m));
    Complex r2 = p.periods(1, m + 1) / (zeta * zeta * p.periods(1, m));
    CHECK(std::min(std::abs(r1 - 1.0), std::abs(r1 + 1.0)) < 1e-9);
    CHECK(std::abs(r1 - r2) < 1e-9);
  }
}

TEST_CASE("rescaling covariance of the Gram matrix") {
  // g(x) = f(lambda x) pulls back omega_i to lambda^i omega_i, so
  // G_f = D G_g D^H with D = diag(lambda, ..., lambda^g).
  auto check_pair = [&](Complex lambda) {
    auto f = sextic();
    std::vector<Complex> scaled(7, Complex(0, 0));
    Complex pw = 1.0;
    for (int k = 0; k <= 6; ++k) {
      scaled[size_t(k)] = f.coefficients[size_t(k)] * pw;
      pw *= lambda;
    }
    auto g = cv::make_curve(scaled);
    cv::GramMatrix Gf = cv::hodge_gram(f, cv::periods(f, 64));
    cv::GramMatrix Gg = cv::hodge_gram(g, cv::periods(g, 64));
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
    D(0, 0) = lambda;
    D(1, 1) = lambda * lambda;
    Eigen::MatrixXcd expect = D * Gg.m * D.adjoint();
    CHECK(max_abs(Gf.m - expect) < 1e-8 * (1.0 + max_abs(Gf.m)));
  };
  check_pair(Complex(2.0, 0.0));
  check_pair(std::polar(1.3, 0.7));
}

TEST_CASE("canonical density: pinned value, symmetry, sheet independence") {
  auto c = quintic();
  cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));

  // At x = 0: a_1 = 1/y with |y| = 1, a_2 = 0, so rho(0) = (G^{-1})_11.
  double rho0 = cv::canonical_density(c, G, 0.0);
  Eigen::MatrixXcd ginv = G.m.inverse();
  CHECK(rho0 == doctest::Approx(ginv(0, 0).real()).epsilon(1e-12));

  // Deck symmetry x -> zeta_5 x preserves the canonical density.
  Complex zeta = std::polar(1.0, 2.0 * kPi / 5.0);
  for (Complex x : {Complex(0.3, 0.2), Complex(-0.7, 0.4), Complex(1.9, -0.3)}) {
    double base = cv::canonical_density(c, G, x);
    CHECK(cv::canonical_density(c, G, zeta * x) ==
          doctest::Approx(base).epsilon(1e-10));
    CHECK(cv::canonical_density(c, G, x, -1) == doctest::Approx(base).epsilon(1e-15));
    CHECK(base >= 0.0);
  }

  CHECK_THROWS_AS(cv::canonical_density(c, G, c.branch_points[0] + Complex(1e-8, 0)),
                  klab::validation_error);
  CHECK_THROWS_AS(cv::canonical_density(c, G, 0.0, 2), klab::validation_error);
}

TEST_CASE("density is independent of the orthonormal basis presentation") {
  auto c = sextic();
  cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));
  Eigen::MatrixXcd ginv = G.m.inverse();

  // B with B^T G conj(B) = I: columns are an orthonormal basis; any further
  // unitary mixing U leaves sum_k |(B U)^T a|^2 unchanged.
  Eigen::LLT<Eigen::MatrixXcd> llt(G.m.transpose());
  Eigen::MatrixXcd L = llt.matrixL();
  Eigen::MatrixXcd B = L.inverse().adjoint();
  Eigen::MatrixXcd U(2, 2);
  double th = 0.456;
  U << Complex(std::cos(th), 0), Complex(-std::sin(th), 0.0),
      Complex(std::sin(th), 0), Complex(std::cos(th), 0);
  U *= std::polar(1.0, 0.9);

  for (Complex x : {Complex(0.4, 0.1), Complex(-1.3, 0.8), Complex(2.2, -0.6)}) {
    double direct = cv::canonical_density(c, G, x);
    Complex y = std::sqrt(cv::evaluate(c, x));
    Eigen::VectorXcd a(2);
    a << 1.0 / y, x / y;
    double via_basis = ((B * U).transpose() * a).squaredNorm();
    CHECK(std::abs(direct - via_basis) < 1e-12 * (1.0 + direct));
  }
}

TEST_CASE("total mass equals the genus") {
  struct Row {
    cv::HyperellipticCurve c;
    double expect;
  };
  for (auto& row : {Row{lemniscatic(), 1.0}, Row{quintic(), 2.0}, Row{sextic(), 2.0}}) {
    cv::GramMatrix G = cv::hodge_gram(row.c, cv::periods(row.c, 64));
    cv::MassReport m = cv::total_mass(row.c, G, 160);
    CHECK(std::abs(m.value - row.expect) < 1e-2);
    CHECK(m.doubling_rel_change < 1e-3);
    CHECK(m.tail_bound < 1e-3);
    CHECK(m.radial_nodes == 320);
  }
}

TEST_CASE("mass quadrature is threading-invariant") {
  auto c = lemniscatic();
  cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));
  cv::MassReport serial = cv::total_mass(c, G, 96, 1);
  cv::MassReport parallel = cv::total_mass(c, G, 96, 4);
  CHECK(serial.value == parallel.value);  // bit-identical by construction
}

TEST_CASE("factor-of-2 bookkeeping on omega_1") {
  // <alpha, alpha> = 2 (alpha, alpha): the L^2 pairing of omega_1 computed by
  // direct area quadrature must equal twice the period-route inner product.
  // With W = diag(1, big), total_mass(c, W) -> 2 int_C |a_1|^2 dA, which is
  // the surface integral int_S |a_1|^2 dA = <omega_1, omega_1> / 2.
  auto check = [&](const cv::HyperellipticCurve& c) {
    cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));
    cv::GramMatrix weight;
    weight.m = Eigen::MatrixXcd::Identity(c.genus, c.genus) * 1e12;
    weight.m(0, 0) = 1.0;
    double area_route = cv::total_mass(c, weight, 160).value;  // (omega_1, omega_1)
    double l2_pairing = 2.0 * area_route;                      // <omega_1, omega_1>
    double period_route = G.m(0, 0).real();
    CHECK(l2_pairing == doctest::Approx(2.0 * period_route).epsilon(2e-3));
  };
  check(lemniscatic());
  check(quintic());
  check(sextic());
}

TEST_CASE("region measure: additivity, exhaustion, empty region") {
  auto c = lemniscatic();
  cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));

  // Asymmetric split so the panels do not coincide.
  double whole = cv::measure_of_rectangle(c, G, -0.43, 0.61, 0.12, 0.77);
  double left = cv::measure_of_rectangle(c, G, -0.43, 0.13, 0.12, 0.77);
  double right = cv::measure_of_rectangle(c, G, 0.13, 0.61, 0.12, 0.77);
  CHECK(std::abs(whole - left - right) < 1e-8);

  CHECK(cv::measure_of_rectangle(c, G, 0.3, 0.3, -1.0, 1.0) == 0.0);

  // Exhaustion towards the full plane reproduces the total mass.
  cv::MassReport m = cv::total_mass(c, G, 160);
  double big = cv::measure_of_rectangle(c, G, -70, 70, -70, 70);
  double bigger = cv::measure_of_rectangle(c, G, -90, 90, -90, 90);
  CHECK(std::abs(big - m.value) < 1e-2);
  CHECK(std::abs(bigger - m.value) < std::abs(big - m.value));

  // One sheet is exactly half of two.
  double one = cv::measure_of_rectangle(c, G, 0.1, 0.5, 0.2, 0.6, 1);
  double two = cv::measure_of_rectangle(c, G, 0.1, 0.5, 0.2, 0.6, 2);
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-14));

  // Branch point 1e-7 from the boundary violates the margin.
  CHECK_THROWS_AS(cv::measure_of_rectangle(c, G, 1.0 - 1e-7, 2.0, -1.0, 1.0),
                  klab::validation_error);
  CHECK_THROWS_AS(cv::measure_of_rectangle(c, G, 0.5, 0.4, 0.0, 1.0),
                  klab::validation_error);
  CHECK_THROWS_AS(cv::measure_of_rectangle(c, G, 0.1, 0.5, 0.2, 0.6, 3),
                  klab::validation_error);
}

TEST_CASE("extremal characterization at sample points") {
  for (auto curve : {lemniscatic(), quintic(), sextic()}) {
    cv::GramMatrix G = cv::hodge_gram(curve, cv::periods(curve, 64));
    for (Complex x : {Complex(0.37, 0.21), Complex(-1.6, 0.5), Complex(0.1, -2.3)}) {
      cv::ExtremalReport r = cv::extremal_check(curve, G, x, 100);
      CHECK_FALSE(r.bound_violated);
      CHECK_FALSE(r.optimum_missed);
      CHECK(r.max_sample_ratio <= 1.0 + 1e-9);
      CHECK(r.optimal_ratio >= 1.0 - 1e-6);
      CHECK(r.optimal_ratio <= 1.0 + 1e-9);
      CHECK(r.trials == 100);
    }
  }
  auto c = lemniscatic();
  cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));
  CHECK_THROWS_AS(cv::extremal_check(c, G, Complex(0.5, 0.5), 0), klab::validation_error);
  CHECK_THROWS_AS(cv::extremal_check(c, G, Complex(0.5, 0.5), 2000000), klab::resource_error);
}

TEST_CASE("a branch point at the centroid is ordered via the nudged reference") {
  // Roots {0, 1, zeta_3, zeta_3^2} have centroid 0, itself a root:
  // f = x^4 - x. The ordering reference must move off the root for the
  // angular sort to be defined; the pipeline then runs normally.
  auto c = cv::make_curve({{0, 0}, {-1, 0}, {0, 0}, {0, 0}, {1, 0}});
  cv::PeriodData p = cv::periods(c, 64);
  CHECK(p.doubling_rel_change < 1e-9);
  cv::GramMatrix G = cv::hodge_gram(c, p);
  CHECK(G.min_eigenvalue > 0.0);
  cv::MassReport m = cv::total_mass(c, G, 160);
  CHECK(std::abs(m.value - 1.0) < 1e-2);
}

TEST_CASE("curve serialization round trip") {
  auto c = quintic();
  std::string text = cv::to_json(c);
  auto back = cv::curve_from_json(text);
  CHECK(back.degree == c.degree);
  CHECK(back.genus == c.genus);
  for (size_t k = 0; k < c.coefficients.size(); ++k)
    CHECK(std::abs(back.coefficients[k] - c.coefficients[k]) == 0.0);

  CHECK_THROWS_AS(cv::curve_from_json("{"), klab::validation_error);
  CHECK_THROWS_AS(cv::curve_from_json("{\"coefficients\": 3}"), klab::validation_error);
  CHECK_THROWS_AS(cv::curve_from_json("{\"coefficients\": [[0,0],[1,0]]}"),
                  klab::validation_error);
}

TEST_CASE("density CSV and mass report formats") {
  auto c = sextic();
  cv::GramMatrix G = cv::hodge_gram(c, cv::periods(c, 64));
  std::string csv = cv::density_csv(c, G, {Complex(0, 0), Complex(0.25, 0.25)});
  CHECK(csv.rfind("re,im,rho\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK_THROWS_AS(cv::density_csv(c, G, {c.branch_points[0]}), klab::validation_error);

  cv::MassReport m = cv::total_mass(c, G, 160);
  std::string j = cv::mass_report_json(m);
  CHECK(j.find("\"value\"") != std::string::npos);
  CHECK(j.find("\"tail_bound\"") != std::string::npos);
  CHECK(j.find("\"doubling_rel_change\"") != std::string::npos);
}

#include "klab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "klab/errors.hpp"
#include "klab/quadrature.hpp"

namespace klab::curves {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

double root_scale(const std::vector<Complex>& roots) {
  double s = 1.0;
  for (const auto& r : roots) s = std::max(s, std::abs(r));
  return s;
}

Complex horner(const std::vector<Complex>& coef, Complex x) {
  Complex v = 0.0;
  for (int k = int(coef.size()) - 1; k >= 0; --k) v = v * x + coef[size_t(k)];
  return v;
}

Complex horner_derivative(const std::vector<Complex>& coef, Complex x) {
  Complex v = 0.0;
  for (int k = int(coef.size()) - 1; k >= 1; --k)
    v = v * x + double(k) * coef[size_t(k)];
  return v;
}

// Deterministic ordering: sort by angle, then modulus, around a reference
// point near the centroid. If a point sits (numerically) on the reference,
// the reference is nudged along a fixed spiral until every angle is defined.
std::vector<Complex> order_by_angle(std::vector<Complex> pts) {
  Complex centroid = 0.0;
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread = std::max(spread, std::abs(p - centroid));
  if (spread == 0.0) spread = 1.0;

  Complex ref = centroid;
  for (int attempt = 0; attempt < 64; ++attempt) {
    double nearest = 1e300;
    for (const auto& p : pts) nearest = std::min(nearest, std::abs(p - ref));
    if (nearest > 1e-9 * spread) break;
    double step = spread * 1e-3 * double(attempt + 1);
    ref = centroid + std::polar(step, 0.7548776662466927 * double(attempt + 1));
  }

  std::sort(pts.begin(), pts.end(), [&](const Complex& a, const Complex& b) {
    double aa = std::atan2((a - ref).imag(), (a - ref).real());
    double ab = std::atan2((b - ref).imag(), (b - ref).real());
    if (aa != ab) return aa < ab;
    return std::abs(a - ref) < std::abs(b - ref);
  });
  return pts;
}

// Even-degree integration model: leading coefficient, its branch points, and
// the row transform expressing x^{i-1} dx / y in the model basis
// xi^{j-1} dxi / eta. Even input: the curve itself, identity transform.
// Odd input: x = c0 + 1/xi with eta = y xi^{g+1}, which gives
// eta^2 = f(c0) xi prod_k (xi - 1/(p_k - c0)) and
// x^{i-1} dx / y = -(c0 xi + 1)^{i-1} xi^{g-i} dxi / eta.
struct IntegrationModel {
  std::vector<Complex> roots;
  Complex lead;
  Eigen::MatrixXcd basis_transform;  // g x g
};

IntegrationModel build_model(const HyperellipticCurve& c) {
  IntegrationModel m;
  int g = c.genus;
  if (c.degree % 2 == 0) {
    m.roots = c.branch_points;
    m.lead = c.coefficients.back();
    m.basis_transform = Eigen::MatrixXcd::Identity(g, g);
    return m;
  }

  Complex centroid = 0.0;
  for (const auto& p : c.branch_points) centroid += p;
  centroid /= double(c.branch_points.size());
  double spread = 0.0;
  for (const auto& p : c.branch_points)
    spread = std::max(spread, std::abs(p - centroid));
  double radius = spread + 1.0;

  // 17 candidate base points on a circle enclosing the roots; keep the one
  // farthest from the root set (17 is prime, so root symmetries cannot tie
  // every candidate).
  Complex c0 = centroid + radius;
  double best = -1.0;
  for (int k = 0; k < 17; ++k) {
    Complex cand = centroid + std::polar(radius, 2.0 * kPi * double(k) / 17.0);
    double nearest = 1e300;
    for (const auto& p : c.branch_points)
      nearest = std::min(nearest, std::abs(cand - p));
    if (nearest > best) {
      best = nearest;
      c0 = cand;
    }
  }

  m.roots.push_back(Complex(0.0, 0.0));
  for (const auto& p : c.branch_points) m.roots.push_back(1.0 / (p - c0));
  m.lead = horner(c.coefficients, c0);

  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(g, g);
  // -(c0 xi + 1)^{i-1} xi^{g-i} = sum_j C(i-1, j-1) xi^{j-1}
  std::vector<std::vector<double>> binom(size_t(g), std::vector<double>(size_t(g), 0.0));
  for (int i = 0; i < g; ++i) {
    binom[size_t(i)][0] = 1.0;
    for (int j = 1; j <= i; ++j)
      binom[size_t(i)][size_t(j)] =
          binom[size_t(i - 1)][size_t(j - 1)] +
          (j <= i - 1 ? binom[size_t(i - 1)][size_t(j)] : 0.0);
  }
  for (int i = 1; i <= g; ++i) {
    for (int j = std::max(1, g + 1 - i); j <= g; ++j) {
      int mth = i + j - g - 1;  // power of c0
      C(i - 1, j - 1) = -binom[size_t(i - 1)][size_t(mth)] * std::pow(c0, mth);
    }
  }
  m.basis_transform = C;
  return m;
}

// Geometry of the ordered model points: cut j joins pts[2j] and pts[2j+1].
struct CutSystem {
  std::vector<Complex> pts;
  Complex sqrt_lead;
  int cuts = 0;
};

// h_l(xi) = ((v-u)/2) sqrt(w-1) sqrt(w+1) with w the affine image of xi
// sending cut l to [-1, 1]; principal square roots. Analytic off cut l and
// squares to (xi - u)(xi - v).
Complex cut_factor(const CutSystem& cs, int l, Complex xi) {
  Complex u = cs.pts[size_t(2 * l)];
  Complex v = cs.pts[size_t(2 * l + 1)];
  Complex half = (v - u) / 2.0;
  Complex w = (xi - (u + v) / 2.0) / half;
  return half * std::sqrt(w - 1.0) * std::sqrt(w + 1.0);
}

// Periods of the model differentials xi^{i-1} dxi / eta over the 2g segment
// cycles, with n Gauss-Legendre nodes per segment. Each period is twice the
// straight-segment integral; the endpoint singularities are removed exactly
// by xi = mid + sin(sigma) half together with the analytic side limits
// sqrt(w - 1)|top = i sqrt(1 - t) on a cut and the constant-ratio
// factorizations sqrt(w - 1) = sqrt(1 + t) sqrt(K) on a gap.
Eigen::MatrixXcd model_periods(const CutSystem& cs, int g, int n) {
  const quad::GaussLegendre rule = quad::gauss_legendre(n);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(g, 2 * g);

  for (int m = 0; m < 2 * g; ++m) {
    Complex L = cs.pts[size_t(m)];
    Complex R = cs.pts[size_t(m + 1)];
    Complex mid = (L + R) / 2.0;
    Complex half_seg = (R - L) / 2.0;

    Complex prefactor;
    int skip_a = -1, skip_b = -1;
    Complex gap_u1, gap_v1;  // endpoints of the right cut of a gap segment
    if (m % 2 == 0) {
      int j = m / 2;
      // dxi = half_seg dt cancels the segment's own cut factor exactly.
      prefactor = 2.0 / (kI * cs.sqrt_lead);
      skip_a = j;
    } else {
      int j = (m - 1) / 2;
      Complex uj = cs.pts[size_t(2 * j)];
      Complex vj = cs.pts[size_t(2 * j + 1)];
      Complex u1 = cs.pts[size_t(2 * j + 2)];
      Complex v1 = cs.pts[size_t(2 * j + 3)];
      Complex K = (R - L) / (vj - uj);
      Complex Kp = (L - R) / (v1 - u1);
      prefactor = 2.0 * half_seg /
                  (cs.sqrt_lead * ((vj - uj) / 2.0) * ((v1 - u1) / 2.0) *
                   std::sqrt(K) * std::sqrt(Kp));
      skip_a = j;
      skip_b = j + 1;
      gap_u1 = u1;
      gap_v1 = v1;
    }

    std::vector<Complex> acc(size_t(g), Complex(0.0, 0.0));
    for (int k = 0; k < n; ++k) {
      double sigma = 0.5 * kPi * rule.node[size_t(k)];
      double weight = 0.5 * kPi * rule.weight[size_t(k)];
      Complex xi = mid + std::sin(sigma) * half_seg;

      Complex denom = 1.0;
      for (int l = 0; l < cs.cuts; ++l) {
        if (l == skip_a || l == skip_b) continue;
        denom *= cut_factor(cs, l, xi);
      }
      if (m % 2 == 1) {
        int j = skip_a;
        Complex uj = cs.pts[size_t(2 * j)];
        Complex vj = cs.pts[size_t(2 * j + 1)];
        Complex wj = (xi - (uj + vj) / 2.0) / ((vj - uj) / 2.0);
        Complex w1 = (xi - (gap_u1 + gap_v1) / 2.0) / ((gap_v1 - gap_u1) / 2.0);
        denom *= std::sqrt(wj + 1.0) * std::sqrt(w1 - 1.0);
      }

      Complex base = weight / denom;
      Complex pw = 1.0;
      for (int i = 0; i < g; ++i) {
        acc[size_t(i)] += base * pw;
        pw *= xi;
      }
    }
    for (int i = 0; i < g; ++i) P(i, m) = prefactor * acc[size_t(i)];
  }
  return P;
}

double rel_change(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  double scale = 1.0 + b.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

// Shared by density, mass, and region quadrature.
struct DensityEvaluator {
  std::vector<Complex> coefficients;
  std::vector<Complex> roots;
  Eigen::MatrixXcd ginv;
  int genus = 0;

  // numerator u^H G^{-1} u with u = (1, x, ..., x^{g-1})
  double numerator(Complex x) const {
    Eigen::VectorXcd u(genus);
    Complex pw = 1.0;
    for (int i = 0; i < genus; ++i) {
      u(i) = pw;
      pw *= x;
    }
    double v = (u.adjoint() * ginv * u).value().real();
    if (v < -1e-12) throw consistency_error("canonical density numerator came out negative");
    return std::max(v, 0.0);
  }

  double density(Complex x) const { return numerator(x) / std::abs(horner(coefficients, x)); }
};

DensityEvaluator make_evaluator(const HyperellipticCurve& c, const GramMatrix& G) {
  if (G.m.rows() != c.genus || G.m.cols() != c.genus)
    throw validation_error("Gram matrix size does not match the curve genus");
  DensityEvaluator ev;
  ev.coefficients = c.coefficients;
  ev.roots = c.branch_points;
  ev.genus = c.genus;
  ev.ginv = G.m.inverse();
  return ev;
}

// Smooth peak cutoff psi(s) = (1-s^2)^3 on [0,1); int_0^1 psi = 16/35.
double peak_cutoff(double s) {
  if (s >= 1.0) return 0.0;
  double t = 1.0 - s * s;
  return t * t * t;
}
constexpr double kPeakCutoffIntegral = 16.0 / 35.0;

// Strength of the integrable 1/|x - p_k| peak of the one-sheet density:
// rho(x) ~ c_k / |x - p_k| with c_k = numerator(p_k) / |f'(p_k)|.
std::vector<double> peak_strengths(const DensityEvaluator& ev) {
  std::vector<double> c(ev.roots.size(), 0.0);
  double lead = std::abs(ev.coefficients.back());
  for (size_t k = 0; k < ev.roots.size(); ++k) {
    double deriv = lead;
    for (size_t l = 0; l < ev.roots.size(); ++l)
      if (l != k) deriv *= std::abs(ev.roots[k] - ev.roots[l]);
    c[k] = ev.numerator(ev.roots[k]) / deriv;
  }
  return c;
}

double min_root_separation(const std::vector<Complex>& roots) {
  double sep = 1e300;
  for (size_t i = 0; i < roots.size(); ++i)
    for (size_t j = i + 1; j < roots.size(); ++j)
      sep = std::min(sep, std::abs(roots[i] - roots[j]));
  return sep;
}

}  // namespace

HyperellipticCurve make_curve(std::vector<Complex> coefficients) {
  if (coefficients.size() < 4)
    throw validation_error("make_curve: degree must be at least 3");
  if (coefficients.size() > 64)
    throw resource_error("make_curve: degree cap exceeded (parameter coefficients)");
  double maxabs = 0.0;
  for (const auto& a : coefficients) maxabs = std::max(maxabs, std::abs(a));
  if (maxabs == 0.0) throw validation_error("make_curve: zero polynomial");
  if (std::abs(coefficients.back()) <= 1e-12 * maxabs)
    throw validation_error("make_curve: leading coefficient vanishes");

  HyperellipticCurve c;
  c.coefficients = coefficients;
  c.degree = int(coefficients.size()) - 1;
  c.genus = (c.degree + 1) / 2 - 1;
  c.infinite_branch_point = (c.degree % 2 == 1);

  // Roots of f: companion-matrix eigenvalues, polished by Newton.
  int d = c.degree;
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i)
    companion(i, d - 1) = -coefficients[size_t(i)] / coefficients[size_t(d)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  for (int i = 0; i < d; ++i) {
    Complex r = solver.eigenvalues()(i);
    for (int it = 0; it < 12; ++it) {
      Complex fp = horner_derivative(coefficients, r);
      if (std::abs(fp) == 0.0) break;
      Complex step = horner(coefficients, r) / fp;
      r -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
    }
    c.branch_points.push_back(r);
  }

  double scale = root_scale(c.branch_points);
  if (min_root_separation(c.branch_points) <= 1e-8 * scale)
    throw validation_error("make_curve: repeated branch points (singular curve)");
  return c;
}

Complex evaluate(const HyperellipticCurve& c, Complex x) {
  return horner(c.coefficients, x);
}

PeriodData periods(const HyperellipticCurve& c, int nodes) {
  if (nodes < 32) throw validation_error("periods: at least 32 nodes per segment required");
  if (nodes > 100000) throw resource_error("periods: node cap exceeded (parameter nodes)");

  IntegrationModel model = build_model(c);
  int g = c.genus;

  PeriodData out;
  out.model_points = order_by_angle(model.roots);
  out.cut_count = g + 1;

  CutSystem cs;
  cs.pts = out.model_points;
  cs.sqrt_lead = std::sqrt(model.lead);
  cs.cuts = g + 1;

  Eigen::MatrixXcd coarse = model_periods(cs, g, nodes);
  Eigen::MatrixXcd fine = model_periods(cs, g, 2 * nodes);
  out.doubling_rel_change = rel_change(coarse, fine);
  if (out.doubling_rel_change > 1e-6)
    throw precision_error("periods: quadrature did not stabilize under node doubling");
  out.nodes = 2 * nodes;
  out.periods = model.basis_transform * fine;

  for (int m = 0; m < 2 * g; ++m) {
    if (m % 2 == 0)
      out.cycles.push_back({m / 2, m / 2});
    else
      out.cycles.push_back({(m - 1) / 2, (m + 1) / 2});
  }

  out.intersection = Eigen::MatrixXi::Zero(2 * g, 2 * g);
  for (int m = 0; m + 1 < 2 * g; ++m) {
    out.intersection(m, m + 1) = 1;
    out.intersection(m + 1, m) = -1;
  }
  return out;
}

GramMatrix hodge_gram(const HyperellipticCurve& c, const PeriodData& p) {
  int g = c.genus;
  if (p.periods.rows() != g || p.periods.cols() != 2 * g)
    throw validation_error("hodge_gram: period matrix shape does not match the genus");

  Eigen::MatrixXd Jd = p.intersection.cast<double>();
  Eigen::MatrixXd Jinv_d = Jd.inverse();
  Eigen::MatrixXi Jinv(2 * g, 2 * g);
  for (int i = 0; i < 2 * g; ++i)
    for (int j = 0; j < 2 * g; ++j)
      Jinv(i, j) = int(std::lround(Jinv_d(i, j)));
  if (p.intersection * Jinv != Eigen::MatrixXi::Identity(2 * g, 2 * g))
    throw consistency_error("hodge_gram: intersection matrix is not unimodular");

  // (i/2) int omega_i ^ conj(omega_j) = -(i/2) Pi J^{-1} Pi^H
  Eigen::MatrixXcd G =
      Complex(0.0, -0.5) * p.periods * Jinv.cast<Complex>() * p.periods.adjoint();

  GramMatrix out;
  out.hermitian_defect = (G - G.adjoint()).cwiseAbs().maxCoeff();
  double scale = 1.0 + G.cwiseAbs().maxCoeff();
  if (out.hermitian_defect > 1e-9 * scale)
    throw consistency_error("hodge_gram: Gram matrix is not Hermitian (orientation/convention failure)");
  out.m = (G + G.adjoint()) / 2.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(out.m);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  if (out.min_eigenvalue <= 0.0) {
    std::ostringstream msg;
    msg << "hodge_gram: Gram matrix is not positive definite (min eigenvalue "
        << out.min_eigenvalue << "; orientation/convention failure)";
    throw consistency_error(msg.str());
  }
  return out;
}

double canonical_density(const HyperellipticCurve& c, const GramMatrix& G,
                         Complex x, int sheet) {
  if (sheet != 1 && sheet != -1)
    throw validation_error("canonical_density: sheet must be +1 or -1");
  for (const auto& p : c.branch_points)
    if (std::abs(x - p) < 1e-6)
      throw validation_error("canonical_density: evaluation point too close to a branch point");
  DensityEvaluator ev = make_evaluator(c, G);
  return ev.density(x);
}

MassReport total_mass(const HyperellipticCurve& c, const GramMatrix& G,
                      int radial_nodes, int threads) {
  if (radial_nodes < 16)
    throw validation_error("total_mass: at least 16 radial nodes required");
  if (radial_nodes > 20000)
    throw resource_error("total_mass: radial node cap exceeded (parameter radial_nodes)");
  if (threads < 1 || threads > 256)
    throw validation_error("total_mass: thread count must be in [1, 256]");

  DensityEvaluator ev = make_evaluator(c, G);
  int g = c.genus;
  int deg = c.degree;

  Complex centroid = 0.0;
  for (const auto& p : ev.roots) centroid += p;
  centroid /= double(ev.roots.size());
  double maxdist = 0.0;
  for (const auto& p : ev.roots) maxdist = std::max(maxdist, std::abs(p - centroid));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig((ev.ginv + ev.ginv.adjoint()) / 2.0);
  double lam = eig.eigenvalues().maxCoeff();
  double lead = std::abs(ev.coefficients.back());

  // Radial layout around the centroid: a dense inner disk [0, R0] holding all
  // branch points, an outer annulus [R0, Rt] integrated in the substituted
  // variable s = R0/r (which makes the O(r^{2g-1-deg}) integrand bounded and
  // smooth, so slowly decaying odd-degree tails converge too), and an
  // explicit analytic bound for r > Rt from the stated density decay.
  double R0 = std::max(2.0 * maxdist + 2.0, 4.0);
  double Rt = R0 * 1e6;
  // For r >= Rt: |x| <= r (1 + |centroid|/Rt) and |x - p_k| >= r - maxdist
  // >= r/2, so 2 rho r <= C r^{2g-1-deg}.
  double B = 1.0 + std::abs(centroid) / Rt;
  double C = 2.0 * lam * double(g) * std::pow(B, 2 * g - 2) *
             std::pow(2.0, deg) / lead;
  double tail = 2.0 * kPi * C * std::pow(Rt, 2 * g - deg) / double(deg - 2 * g);
  if (tail > 1e-3)
    throw precision_error("total_mass: tail bound exceeds the tolerance budget");

  std::vector<double> peaks = peak_strengths(ev);
  double delta = std::min({1.0, min_root_separation(ev.roots) / 3.0,
                           (R0 - maxdist) / 2.0});

  auto grid_mass = [&](int nr) {
    quad::GaussLegendre rule = quad::gauss_legendre(nr);
    int ntheta = 2 * nr;
    double wtheta = 2.0 * kPi / double(ntheta);
    // (radius, radial weight) pairs: inner disk nodes, then annulus nodes
    // with the 1/s substitution Jacobian folded into the weight.
    std::vector<std::pair<double, double>> radii;
    for (int ir = 0; ir < nr; ++ir) {
      double r = 0.5 * (rule.node[size_t(ir)] + 1.0) * R0;
      radii.emplace_back(r, 0.5 * R0 * rule.weight[size_t(ir)]);
    }
    double s_lo = R0 / Rt;
    for (int ir = 0; ir < nr; ++ir) {
      double s = s_lo + 0.5 * (rule.node[size_t(ir)] + 1.0) * (1.0 - s_lo);
      double ws = 0.5 * (1.0 - s_lo) * rule.weight[size_t(ir)];
      radii.emplace_back(R0 / s, ws * R0 / (s * s));
    }

    std::vector<double> partial(radii.size(), 0.0);
    auto radial_term = [&](size_t ir) {
      double r = radii[ir].first;
      double wr = radii[ir].second;
      double s = 0.0;
      for (int q = 0; q < ntheta; ++q) {
        double th = wtheta * double(q);
        Complex x = centroid + std::polar(r, th);
        double f = 2.0 * ev.density(x);
        for (size_t k = 0; k < peaks.size(); ++k) {
          double dist = std::abs(x - ev.roots[k]);
          if (dist < delta && dist > 0.0)
            f -= 2.0 * peaks[k] * peak_cutoff(dist / delta) / dist;
        }
        s += wtheta * f;
      }
      partial[ir] = wr * r * s;
    };

    if (threads <= 1) {
      for (size_t ir = 0; ir < radii.size(); ++ir) radial_term(ir);
    } else {
      std::vector<std::thread> pool;
      size_t nthreads = size_t(std::min<long>(threads, long(radii.size())));
      for (size_t t = 0; t < nthreads; ++t)
        pool.emplace_back([&, t]() {
          for (size_t ir = t; ir < radii.size(); ir += nthreads) radial_term(ir);
        });
      for (auto& th : pool) th.join();
    }

    double total = 0.0;
    for (size_t ir = 0; ir < radii.size(); ++ir) total += partial[ir];
    for (size_t k = 0; k < peaks.size(); ++k)
      total += 2.0 * peaks[k] * 2.0 * kPi * delta * kPeakCutoffIntegral;
    return total;
  };

  double coarse = grid_mass(radial_nodes);
  double fine = grid_mass(2 * radial_nodes);

  MassReport report;
  report.value = fine;
  report.radius = R0;
  report.radial_nodes = 2 * radial_nodes;
  report.angular_nodes = 4 * radial_nodes;
  report.tail_bound = tail;
  report.doubling_rel_change = std::abs(fine - coarse) / (1.0 + std::abs(fine));
  return report;
}

double measure_of_rectangle(const HyperellipticCurve& c, const GramMatrix& G,
                            double re_lo, double re_hi, double im_lo,
                            double im_hi, int sheets) {
  if (re_lo > re_hi || im_lo > im_hi)
    throw validation_error("measure_of_rectangle: inverted rectangle bounds");
  if (sheets != 1 && sheets != 2)
    throw validation_error("measure_of_rectangle: sheets must be 1 or 2");
  if (re_lo == re_hi || im_lo == im_hi) return 0.0;  // degenerate: zero area

  DensityEvaluator ev = make_evaluator(c, G);

  auto boundary_distance = [&](Complex p) {
    double x = p.real(), y = p.imag();
    // Distance to the rectangle boundary (zero on it, positive elsewhere).
    double dx = std::max({re_lo - x, x - re_hi, 0.0});
    double dy = std::max({im_lo - y, y - im_hi, 0.0});
    if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);  // outside
    return std::min(std::min(x - re_lo, re_hi - x), std::min(y - im_lo, im_hi - y));
  };

  std::vector<size_t> inside;
  std::vector<double> delta;
  std::vector<double> peaks = peak_strengths(ev);
  double sep3 = std::min(1.0, min_root_separation(ev.roots) / 3.0);
  for (size_t k = 0; k < ev.roots.size(); ++k) {
    Complex p = ev.roots[k];
    double bd = boundary_distance(p);
    if (bd < 1e-4)
      throw validation_error("measure_of_rectangle: branch point within margin of the region boundary (parameter region)");
    bool is_inside = p.real() > re_lo && p.real() < re_hi && p.imag() > im_lo && p.imag() < im_hi;
    if (is_inside) {
      inside.push_back(k);
      delta.push_back(std::min(sep3, 0.9 * bd));
    }
  }

  auto integrand = [&](Complex x) {
    double f = ev.density(x);
    for (size_t t = 0; t < inside.size(); ++t) {
      size_t k = inside[t];
      double dist = std::abs(x - ev.roots[k]);
      if (dist < delta[t] && dist > 0.0)
        f -= peaks[k] * peak_cutoff(dist / delta[t]) / dist;
    }
    return double(sheets) * f;
  };

  static const quad::GaussLegendre rule8 = quad::gauss_legendre(8);
  static const quad::GaussLegendre rule16 = quad::gauss_legendre(16);
  auto panel_value = [&](const quad::GaussLegendre& rule, double x0, double x1,
                         double y0, double y1) {
    double hx = 0.5 * (x1 - x0), hy = 0.5 * (y1 - y0);
    double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    double s = 0.0;
    for (size_t a = 0; a < rule.node.size(); ++a) {
      double x = cx + hx * rule.node[a];
      double row = 0.0;
      for (size_t b = 0; b < rule.node.size(); ++b) {
        double y = cy + hy * rule.node[b];
        row += rule.weight[b] * integrand(Complex(x, y));
      }
      s += rule.weight[a] * row;
    }
    return s * hx * hy;
  };

  struct Panel {
    double x0, x1, y0, y1;
    int depth;
  };
  std::vector<Panel> stack{{re_lo, re_hi, im_lo, im_hi, 0}};
  double total = 0.0;
  long panels = 0;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    if (++panels > 200000)
      throw precision_error("measure_of_rectangle: refinement budget exhausted");
    double a = panel_value(rule8, p.x0, p.x1, p.y0, p.y1);
    double b = panel_value(rule16, p.x0, p.x1, p.y0, p.y1);
    if (std::abs(a - b) <= 1e-12 + 1e-10 * std::abs(b) || p.depth >= 14) {
      total += b;
      continue;
    }
    double mx = 0.5 * (p.x0 + p.x1), my = 0.5 * (p.y0 + p.y1);
    stack.push_back({p.x0, mx, p.y0, my, p.depth + 1});
    stack.push_back({mx, p.x1, p.y0, my, p.depth + 1});
    stack.push_back({p.x0, mx, my, p.y1, p.depth + 1});
    stack.push_back({mx, p.x1, my, p.y1, p.depth + 1});
  }

  for (size_t t = 0; t < inside.size(); ++t)
    total += double(sheets) * peaks[inside[t]] * 2.0 * kPi * delta[t] * kPeakCutoffIntegral;
  return total;
}

ExtremalReport extremal_check(const HyperellipticCurve& c, const GramMatrix& G,
                              Complex x, int trials, std::uint64_t seed) {
  if (trials < 1) throw validation_error("extremal_check: trials must be positive");
  if (trials > 1000000)
    throw resource_error("extremal_check: trial cap exceeded (parameter trials)");
  double rho = canonical_density(c, G, x);

  int g = c.genus;
  Eigen::MatrixXcd Gt = G.m.transpose();  // norm form: |phi|^2 = c^H G^T c
  Complex y = std::sqrt(horner(c.coefficients, x));
  Eigen::VectorXcd a(g);
  Complex pw = 1.0;
  for (int i = 0; i < g; ++i) {
    a(i) = pw / y;
    pw *= x;
  }

  ExtremalReport report;
  report.trials = trials;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd z(g);
    for (int i = 0; i < g; ++i) z(i) = Complex(gauss(rng), gauss(rng));
    double norm2 = (z.adjoint() * Gt * z).value().real();
    if (norm2 <= 0.0) throw consistency_error("extremal_check: nonpositive Hodge norm");
    Eigen::VectorXcd coeff = z / std::sqrt(norm2);
    Complex val = (a.transpose() * coeff).value();
    report.max_sample_ratio = std::max(report.max_sample_ratio, std::norm(val) / rho);
  }

  // Cauchy-Schwarz optimizer: coeff* = conj(G^{-1} a) / sqrt(rho) has unit
  // norm and |a . coeff*|^2 = rho.
  Eigen::VectorXcd opt = (G.m.inverse() * a).conjugate() / std::sqrt(rho);
  Complex val = (a.transpose() * opt).value();
  report.optimal_ratio = std::norm(val) / rho;

  report.bound_violated = report.max_sample_ratio > 1.0 + 1e-9;
  report.optimum_missed = report.optimal_ratio < 1.0 - 1e-6;
  return report;
}

std::string to_json(const HyperellipticCurve& c) {
  nlohmann::json j;
  j["coefficients"] = nlohmann::json::array();
  for (const auto& a : c.coefficients)
    j["coefficients"].push_back({a.real(), a.imag()});
  return j.dump(2);
}

HyperellipticCurve curve_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("curve_from_json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("coefficients") || !j["coefficients"].is_array())
    throw validation_error("curve_from_json: expected an object with a coefficients array");
  std::vector<Complex> coef;
  for (const auto& entry : j["coefficients"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
      throw validation_error("curve_from_json: coefficients must be [re, im] pairs");
    coef.emplace_back(entry[0].get<double>(), entry[1].get<double>());
  }
  return make_curve(coef);
}

std::string density_csv(const HyperellipticCurve& c, const GramMatrix& G,
                        const std::vector<Complex>& samples) {
  DensityEvaluator ev = make_evaluator(c, G);
  for (const auto& x : samples)
    for (const auto& p : c.branch_points)
      if (std::abs(x - p) < 1e-6)
        throw validation_error("density_csv: sample too close to a branch point");
  std::ostringstream out;
  out << std::setprecision(17) << "re,im,rho\n";
  for (const auto& x : samples)
    out << x.real() << "," << x.imag() << "," << ev.density(x) << "\n";
  return out.str();
}

std::string mass_report_json(const MassReport& r) {
  nlohmann::json j;
  j["value"] = r.value;
  j["radius"] = r.radius;
  j["radial_nodes"] = r.radial_nodes;
  j["angular_nodes"] = r.angular_nodes;
  j["tail_bound"] = r.tail_bound;
  j["doubling_rel_change"] = r.doubling_rel_change;
  return j.dump(2);
}

}  // namespace klab::curves

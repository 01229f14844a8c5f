#include "klab/hodge.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "klab/errors.hpp"
#include "klab/exact_linalg.hpp"

namespace klab::hodge {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd to_eigen(const IntMatrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = double(m.at(r, c));
  return out;
}

// Edge weights of the abelianized cover data: 2g rows of length d, required
// to hit a generating set of Z^d (d = 1: unit gcd; d = 2: unit gcd of the
// 2x2 minors on top of a nonzero row space).
void validate_weights(int g, const std::vector<std::vector<int>>& weights) {
  if (g < 1) throw validation_error("genus must be at least 1");
  if (int(weights.size()) != 2 * g)
    throw validation_error("weight matrix needs one row per generator edge");
  if (weights.empty()) throw validation_error("empty weight matrix");
  std::size_t d = weights[0].size();
  if (d != 1 && d != 2)
    throw validation_error("abelian deck rank must be 1 or 2");
  for (const auto& row : weights)
    if (row.size() != d) throw validation_error("ragged weight matrix");
  if (d == 1) {
    long long gcd = 0;
    for (const auto& row : weights) gcd = std::gcd(gcd, (long long)row[0]);
    if (gcd != 1) throw validation_error("weights do not surject onto Z");
  } else {
    long long gcd = 0;
    for (std::size_t i = 0; i < weights.size() && gcd != 1; ++i)
      for (std::size_t j = i + 1; j < weights.size() && gcd != 1; ++j) {
        long long det = (long long)weights[i][0] * weights[j][1] -
                        (long long)weights[i][1] * weights[j][0];
        gcd = std::gcd(gcd, det);
      }
    if (gcd != 1) throw validation_error("weights do not surject onto Z^2");
  }
}

std::complex<double> unit_phase(const std::vector<double>& theta,
                                const std::vector<int>& weight) {
  double angle = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j)
    angle += theta[j] * double(weight[j]);
  return std::polar(1.0, angle);
}

// Projector diagonal onto the orthogonal complement of span(vs), dependent
// or vanishing vectors dropped; also reports the span's rank.
Eigen::VectorXd complement_diagonal(std::vector<Eigen::VectorXcd> vs, int* rank) {
  std::vector<Eigen::VectorXcd> basis;
  for (auto& v : vs) {
    double original = v.norm();
    for (const auto& q : basis) v -= q.dot(v) * q;
    if (v.norm() > 1e-9 * (original + 1.0)) basis.push_back(v.normalized());
  }
  if (rank) *rank = int(basis.size());
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(vs.front().size());
  for (const auto& q : basis) diag -= q.cwiseAbs2();
  return diag;
}

struct TwistedDiag {
  Eigen::VectorXd diag;
  int span_rank = 0;
};

TwistedDiag twisted_diag(const complexes::CWSurface& base,
                         const std::vector<std::vector<int>>& weights,
                         const std::vector<double>& theta) {
  int e = int(base.edges.size());
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(e);
  for (int i = 0; i < e; ++i)
    u(i) = unit_phase(theta, weights[i]) - 1.0;

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(e);
  double angle = 0.0;  // character applied to the running deck prefix
  for (const auto& se : base.faces[0]) {
    if (se.sign > 0) {
      v(se.edge) += std::polar(1.0, angle);
      for (std::size_t j = 0; j < theta.size(); ++j)
        angle += theta[j] * double(weights[se.edge][j]);
    } else {
      for (std::size_t j = 0; j < theta.size(); ++j)
        angle -= theta[j] * double(weights[se.edge][j]);
      v(se.edge) -= std::polar(1.0, angle);
    }
  }

  TwistedDiag out;
  out.diag = complement_diagonal({u, v.conjugate()}, &out.span_rank);
  return out;
}

void check_entries(EdgeMeasure& m) {
  double sum = 0.0;
  for (double& v : m.value) {
    if (v < -1e-12)
      throw consistency_error("negative edge measure entry");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  m.total = sum;
}

}  // namespace

HarmonicProjector harmonic_projector(const complexes::CWSurface& c) {
  complexes::validate(c);
  complexes::BoundaryMaps maps = complexes::boundary_matrices(c);
  Eigen::MatrixXd d0 = to_eigen(maps.d0);
  Eigen::MatrixXd d1 = to_eigen(maps.d1);
  Eigen::MatrixXd laplacian = d0 * d0.transpose() + d1.transpose() * d1;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success)
    throw consistency_error("Laplacian eigen-decomposition failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  double cutoff = 1e-9 * (ev(ev.size() - 1) + 1.0);

  int dim = 0;
  while (dim < ev.size() && ev(dim) <= cutoff) ++dim;
  int b1 = complexes::betti_numbers(c).b1;
  if (dim != b1)
    throw consistency_error("numerical harmonic rank " + std::to_string(dim) +
                            " disagrees with the exact Betti number " +
                            std::to_string(b1));

  Eigen::MatrixXd kernel = solver.eigenvectors().leftCols(dim);
  HarmonicProjector out;
  out.p = kernel * kernel.transpose();
  out.rank = dim;
  return out;
}

EdgeMeasure canonical_edge_measure(const complexes::CWSurface& c) {
  HarmonicProjector proj = harmonic_projector(c);
  EdgeMeasure m;
  m.value.resize(std::size_t(proj.p.rows()));
  for (std::size_t e = 0; e < m.value.size(); ++e)
    m.value[e] = 0.5 * proj.p(Eigen::Index(e), Eigen::Index(e));
  check_entries(m);
  return m;
}

EdgeMeasure pushforward_measure(const complexes::CWSurface& base,
                                const covers::CoverSpec& spec) {
  covers::validate_for_genus(spec, base.genus);
  covers::BuiltCover cover = covers::build_cover(base, spec);
  EdgeMeasure fine = canonical_edge_measure(cover.complex);

  EdgeMeasure m;
  m.value.resize(base.edges.size());
  for (std::size_t e = 0; e < base.edges.size(); ++e) {
    double lo = 1e300, hi = -1e300, sum = 0.0;
    for (int q = 0; q < cover.degree; ++q) {
      double v = fine.value[std::size_t(cover.edge_lift(int(e), q))];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    if (hi - lo > 1e-9)
      throw consistency_error("lifts of one edge carry unequal measure");
    m.value[e] = sum / double(cover.degree);
  }
  check_entries(m);
  return m;
}

Eigen::VectorXd twisted_projector_diagonal(
    int g, const std::vector<std::vector<int>>& weights,
    const std::vector<double>& theta) {
  validate_weights(g, weights);
  if (theta.size() != weights[0].size())
    throw validation_error("character dimension does not match deck rank");
  complexes::CWSurface base = complexes::genus_surface_complex(g);
  return twisted_diag(base, weights, theta).diag;
}

FourierMeasure fourier_limit_measure(int g,
                                     const std::vector<std::vector<int>>& weights,
                                     std::int64_t nodes_per_circle) {
  validate_weights(g, weights);
  int d = int(weights[0].size());
  if (nodes_per_circle == 0) nodes_per_circle = d == 1 ? 2048 : 256;
  if (nodes_per_circle < 2) throw validation_error("need at least two nodes per circle");

  complexes::CWSurface base = complexes::genus_surface_complex(g);
  std::int64_t total_nodes = d == 1 ? nodes_per_circle
                                    : nodes_per_circle * nodes_per_circle;
  if (total_nodes > (std::int64_t(1) << 22))
    throw resource_error("torus grid exceeds the node cap");

  // One pass to find the generic (majority) span rank, one to average the
  // kept diagonals; node order is fixed so the float sums are reproducible.
  std::vector<std::int64_t> rank_count(3, 0);
  std::vector<TwistedDiag> diags;
  diags.reserve(std::size_t(total_nodes));
  std::vector<double> theta(std::size_t(d), 0.0);
  for (std::int64_t idx = 0; idx < total_nodes; ++idx) {
    std::int64_t rem = idx;
    for (int j = 0; j < d; ++j) {
      theta[std::size_t(j)] =
          2.0 * kPi * double(rem % nodes_per_circle) / double(nodes_per_circle);
      rem /= nodes_per_circle;
    }
    diags.push_back(twisted_diag(base, weights, theta));
    ++rank_count[std::size_t(diags.back().span_rank)];
  }
  std::size_t majority = 0;
  for (std::size_t r = 1; r < rank_count.size(); ++r)
    if (rank_count[r] > rank_count[majority]) majority = r;

  FourierMeasure out;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(2 * g);
  for (const auto& td : diags) {
    if (std::size_t(td.span_rank) == majority) {
      acc += td.diag;
      ++out.nodes;
    } else {
      ++out.discarded;
    }
  }
  if (out.nodes == 0) throw consistency_error("every quadrature node was degenerate");
  acc /= double(out.nodes);

  out.measure.value.resize(std::size_t(2 * g));
  for (int e = 0; e < 2 * g; ++e) out.measure.value[std::size_t(e)] = 0.5 * acc(e);
  check_entries(out.measure);
  return out;
}

ConvergenceReport measure_convergence_experiment(const complexes::CWSurface& base,
                                                 const covers::TowerSpec& tower) {
  covers::validate(tower, base.genus);
  ConvergenceReport report;
  for (const auto& level : tower.levels) {
    EdgeMeasure m = pushforward_measure(base, level);
    report.degrees.push_back(level.group.order);
    report.totals.push_back(m.total);
    report.levels.push_back(std::move(m));
  }
  for (std::size_t k = 0; k + 1 < report.levels.size(); ++k) {
    double sup = 0.0;
    for (std::size_t e = 0; e < report.levels[k].value.size(); ++e)
      sup = std::max(sup, std::abs(report.levels[k].value[e] -
                                   report.levels[k + 1].value[e]));
    report.successive_sup.push_back(sup);
  }
  if (tower.declared_limit != "other" && tower.limit_rank >= 1 &&
      tower.limit_rank <= 2) {
    FourierMeasure fm = fourier_limit_measure(base.genus, tower.limit_weights);
    report.limit = std::move(fm.measure);
    report.limit_nodes = fm.nodes;
    report.limit_discarded = fm.discarded;
  }
  return report;
}

std::string measure_csv(const EdgeMeasure& m,
                        const std::vector<std::string>& labels) {
  if (labels.size() != m.value.size())
    throw validation_error("label count does not match edge count");
  std::ostringstream out;
  out.precision(17);
  out << "edge_id,label,value\n";
  for (std::size_t e = 0; e < m.value.size(); ++e)
    out << e << ',' << labels[e] << ',' << m.value[e] << '\n';
  return out.str();
}

std::string report_json(const ConvergenceReport& r,
                        const std::vector<std::string>& labels) {
  nlohmann::json j;
  j["edge_labels"] = labels;
  j["levels"] = nlohmann::json::array();
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    j["levels"].push_back({{"degree", r.degrees[k]},
                           {"values", r.levels[k].value},
                           {"total", r.levels[k].total}});
  }
  j["successive_sup_diff"] = r.successive_sup;
  j["totals"] = r.totals;
  if (r.limit) {
    j["limit"] = {{"values", r.limit->value},
                  {"total", r.limit->total},
                  {"nodes", r.limit_nodes},
                  {"discarded", r.limit_discarded}};
  }
  return j.dump(2);
}

}  // namespace klab::hodge

#include "klab/group_ring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "klab/errors.hpp"
#include "klab/exact_linalg.hpp"

namespace klab::l2 {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Desk-scale guards: side length of the permutation-basis matrix, quotient
// order, torus grid size.
constexpr std::int64_t kMaxSideLength = 20000;
constexpr std::int64_t kMaxQuotientOrder = std::int64_t(1) << 20;
constexpr std::int64_t kMaxGridNodes = std::int64_t(1) << 24;

std::int64_t mod_reduce(std::int64_t e, std::int64_t n) {
  std::int64_t r = e % n;
  return r < 0 ? r + n : r;
}

// Singular values below 1e-8 * (sigma_max + 1) count as zero.
int numerical_corank(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  double tau = 1e-8 * (smax + 1.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tau) ++rank;
  return static_cast<int>(m.cols()) - rank;
}

Eigen::MatrixXcd evaluate_symbol(const GroupRingMatrix& f,
                                 const std::vector<double>& theta) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(f.rows, f.cols);
  for (const auto& [pos, poly] : f.entries) {
    std::complex<double> v = 0.0;
    for (const auto& [exp, coef] : poly) {
      double angle = 0.0;
      for (int i = 0; i < f.rank_d; ++i) angle += theta[i] * double(exp[i]);
      v += double(coef) * std::polar(1.0, angle);
    }
    m(pos.first, pos.second) = v;
  }
  return m;
}

}  // namespace

void GroupRingMatrix::add_term(int r, int c, Exponent exp, std::int64_t coef) {
  if (coef == 0) return;
  auto& poly = entries[{r, c}];
  auto it = poly.find(exp);
  if (it == poly.end()) {
    poly.emplace(std::move(exp), coef);
    return;
  }
  it->second += coef;
  if (it->second == 0) poly.erase(it);
  if (poly.empty()) entries.erase({r, c});
}

const LaurentPoly* GroupRingMatrix::entry(int r, int c) const {
  auto it = entries.find({r, c});
  return it == entries.end() ? nullptr : &it->second;
}

void validate(const GroupRingMatrix& f) {
  if (f.rank_d < 1) throw validation_error("group ring rank must be positive");
  if (f.rows < 0 || f.cols < 0) throw validation_error("negative matrix shape");
  for (const auto& [pos, poly] : f.entries) {
    if (pos.first < 0 || pos.first >= f.rows || pos.second < 0 ||
        pos.second >= f.cols)
      throw validation_error("group ring entry outside matrix shape");
    if (poly.empty())
      throw validation_error("stored entry with empty support");
    for (const auto& [exp, coef] : poly) {
      if (int(exp.size()) != f.rank_d)
        throw validation_error("exponent length does not match group rank");
      if (coef == 0) throw validation_error("stored zero coefficient");
    }
  }
}

std::int64_t Quotient::order() const {
  std::int64_t n = 1;
  for (std::int64_t m : moduli) {
    if (m <= 0) throw validation_error("quotient moduli must be positive");
    if (m > kMaxQuotientOrder / n) throw resource_error("quotient order too large");
    n *= m;
  }
  return n;
}

void validate_quotient(const GroupRingMatrix& f, const Quotient& q) {
  validate(f);
  if (int(q.moduli.size()) != f.rank_d)
    throw validation_error("quotient moduli count does not match group rank");
  q.order();
}

std::vector<Eigen::MatrixXcd> specialize(const GroupRingMatrix& f,
                                         const Quotient& q) {
  validate_quotient(f, q);
  std::int64_t n = q.order();
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(std::size_t(n));
  std::vector<double> theta(std::size_t(f.rank_d), 0.0);
  for (std::int64_t idx = 0; idx < n; ++idx) {
    std::int64_t rem = idx;
    for (int i = 0; i < f.rank_d; ++i) {
      std::int64_t k = rem % q.moduli[i];
      rem /= q.moduli[i];
      theta[i] = 2.0 * kPi * double(k) / double(q.moduli[i]);
    }
    out.push_back(evaluate_symbol(f, theta));
  }
  return out;
}

std::int64_t kernel_dim_finite(const GroupRingMatrix& f, const Quotient& q) {
  validate_quotient(f, q);
  std::int64_t n = q.order();
  if (f.rows * n > kMaxSideLength || f.cols * n > kMaxSideLength)
    throw resource_error("finite quotient matrix exceeds the size cap");

  // Route one: exact rank in the permutation basis. Group element q' has
  // mixed-radix digits over the moduli, first coordinate fastest; the term
  // coef * t^e of entry (i, j) contributes coef at row (i, q' + e), column
  // (j, q').
  SparseIntMatrix big(int(f.rows * n), int(f.cols * n));
  std::vector<std::int64_t> digits(std::size_t(f.rank_d));
  for (const auto& [pos, poly] : f.entries) {
    for (const auto& [exp, coef] : poly) {
      for (std::int64_t src = 0; src < n; ++src) {
        std::int64_t rem = src, dst = 0, place = 1;
        for (int i = 0; i < f.rank_d; ++i) {
          std::int64_t d = rem % q.moduli[i];
          rem /= q.moduli[i];
          dst += place * mod_reduce(d + exp[i], q.moduli[i]);
          place *= q.moduli[i];
        }
        big.add(int(pos.first * n + dst), int(pos.second * n + src), coef);
      }
    }
  }
  std::int64_t exact = f.cols * n - exact_rank(big);

  // Route two: characters. The evaluations are the Fourier blocks of the
  // same operator, so the kernel dimensions must agree exactly.
  std::int64_t numeric = 0;
  for (const auto& m : specialize(f, q)) numeric += numerical_corank(m);
  if (numeric != exact)
    throw consistency_error(
        "character kernel dimensions disagree with the exact rank (" +
        std::to_string(numeric) + " vs " + std::to_string(exact) + ")");
  return exact;
}

LueckSequence lueck_kernel_sequence(const GroupRingMatrix& f,
                                    const std::vector<Quotient>& tower) {
  if (tower.empty()) throw validation_error("empty quotient tower");
  for (std::size_t k = 0; k + 1 < tower.size(); ++k) {
    if (tower[k].moduli.size() != tower[k + 1].moduli.size())
      throw validation_error("tower levels have mismatched rank");
    for (std::size_t i = 0; i < tower[k].moduli.size(); ++i)
      if (tower[k + 1].moduli[i] % tower[k].moduli[i] != 0)
        throw validation_error("quotient tower is not a divisibility chain");
  }
  LueckSequence seq;
  for (std::size_t k = 0; k < tower.size(); ++k) {
    LueckRecord rec;
    rec.level = int(k + 1);
    rec.degree = tower[k].order();
    rec.dim = kernel_dim_finite(f, tower[k]);
    rec.normalized = Rational(rec.dim, rec.degree);
    seq.records.push_back(rec);
  }
  return seq;
}

VNDimEstimate vn_kernel_dim_fourier(const GroupRingMatrix& f,
                                    std::int64_t nodes_per_circle) {
  validate(f);
  if (f.rank_d > 2)
    throw validation_error("torus quadrature supports deck rank 1 and 2 only");
  if (nodes_per_circle < 1) throw validation_error("node count must be positive");

  VNDimEstimate est;

  bool constant = true;
  for (const auto& [pos, poly] : f.entries)
    for (const auto& [exp, coef] : poly)
      for (std::int64_t e : exp)
        if (e != 0) constant = false;
  if (constant) {
    std::vector<double> theta(std::size_t(f.rank_d), 0.0);
    est.value = double(numerical_corank(evaluate_symbol(f, theta)));
    est.method = "closed-form";
    est.nodes = 1;
    est.error_bound = 0.0;
    return est;
  }

  std::int64_t total = nodes_per_circle;
  if (f.rank_d == 2) {
    if (nodes_per_circle > kMaxGridNodes / nodes_per_circle)
      throw resource_error("torus grid exceeds the node cap");
    total *= nodes_per_circle;
  }
  if (total > kMaxGridNodes) throw resource_error("torus grid exceeds the node cap");

  std::vector<std::int64_t> histogram(std::size_t(f.cols) + 1, 0);
  double sum = 0.0;
  std::vector<double> theta(std::size_t(f.rank_d), 0.0);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int i = 0; i < f.rank_d; ++i) {
      theta[i] = 2.0 * kPi * double(rem % nodes_per_circle) / double(nodes_per_circle);
      rem /= nodes_per_circle;
    }
    int corank = numerical_corank(evaluate_symbol(f, theta));
    ++histogram[std::size_t(corank)];
    sum += double(corank);
  }

  std::size_t majority = 0;
  for (std::size_t c = 1; c < histogram.size(); ++c)
    if (histogram[c] > histogram[majority]) majority = c;
  est.value = sum / double(total);
  est.method = "quadrature";
  est.nodes = total;
  est.degenerate_nodes = total - histogram[majority];
  // Off-majority nodes carry the whole quadrature error; the d/n term is the
  // resolution floor of the grid itself.
  est.error_bound = double(f.rank_d) / double(nodes_per_circle) +
                    double(est.degenerate_nodes) * double(f.cols) / double(total);
  return est;
}

LueckSequence lueck_betti_sequence(const complexes::CWSurface& base,
                                   const covers::TowerSpec& tower, int p) {
  if (p < 0 || p > 2) throw validation_error("cohomological degree must be 0, 1, or 2");
  covers::validate(tower, base.genus);
  LueckSequence seq;
  for (std::size_t k = 0; k < tower.levels.size(); ++k) {
    covers::BuiltCover cover = covers::build_cover(base, tower.levels[k]);
    complexes::BettiVector b = complexes::betti_numbers(cover.complex);
    LueckRecord rec;
    rec.level = int(k + 1);
    rec.degree = cover.degree;
    rec.dim = p == 0 ? b.b0 : p == 1 ? b.b1 : b.b2;
    rec.normalized = Rational(rec.dim, rec.degree);
    seq.records.push_back(rec);
  }
  if (tower.declared_limit != "other")
    seq.limit = p == 1 ? Rational(2 * base.genus - 2) : Rational(0);
  return seq;
}

std::string to_json(const GroupRingMatrix& f) {
  validate(f);
  nlohmann::json j;
  j["rank_d"] = f.rank_d;
  j["rows"] = f.rows;
  j["cols"] = f.cols;
  j["entries"] = nlohmann::json::array();
  for (const auto& [pos, poly] : f.entries) {
    nlohmann::json e;
    e["r"] = pos.first;
    e["c"] = pos.second;
    e["terms"] = nlohmann::json::array();
    for (const auto& [exp, coef] : poly)
      e["terms"].push_back({{"exp", exp}, {"coef", coef}});
    j["entries"].push_back(std::move(e));
  }
  return j.dump(2);
}

GroupRingMatrix group_ring_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad group ring JSON: ") + e.what());
  }
  GroupRingMatrix f;
  try {
    f.rank_d = j.at("rank_d").get<int>();
    f.rows = j.at("rows").get<int>();
    f.cols = j.at("cols").get<int>();
    for (const auto& e : j.at("entries")) {
      int r = e.at("r").get<int>();
      int c = e.at("c").get<int>();
      for (const auto& t : e.at("terms"))
        f.add_term(r, c, t.at("exp").get<Exponent>(),
                   t.at("coef").get<std::int64_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad group ring JSON: ") + e.what());
  }
  validate(f);
  return f;
}

std::string lueck_csv(const LueckSequence& seq) {
  std::ostringstream out;
  out << "level,degree,dim,normalized_num,normalized_den\n";
  for (const auto& rec : seq.records)
    out << rec.level << ',' << rec.degree << ',' << rec.dim << ','
        << rec.normalized.num() << ',' << rec.normalized.den()
        << '\n';
  if (seq.limit)
    out << "# limit " << seq.limit->num() << '/'
        << seq.limit->den() << '\n';
  return out.str();
}

}  // namespace klab::l2

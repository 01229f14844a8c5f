#include "klab/exact_linalg.hpp"

#include <algorithm>
#include <limits>

#include "klab/errors.hpp"

namespace klab {

IntMatrix multiply(const IntMatrix& x, const IntMatrix& y) {
  if (x.cols != y.rows) throw validation_error("matrix product shape mismatch");
  IntMatrix out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      std::int64_t v = x.at(i, k);
      if (v == 0) continue;
      for (int j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(k, j);
    }
  return out;
}

bool is_zero(const IntMatrix& m) {
  return std::all_of(m.a.begin(), m.a.end(),
                     [](std::int64_t v) { return v == 0; });
}

void SparseIntMatrix::add(int r, int c, std::int64_t v) {
  if (v == 0) return;
  auto& rw = row[r];
  auto it = std::lower_bound(
      rw.begin(), rw.end(), c,
      [](const std::pair<int, mpz_class>& e, int col) { return e.first < col; });
  if (it != rw.end() && it->first == c) {
    it->second += v;
    if (it->second == 0) rw.erase(it);
  } else {
    rw.insert(it, {c, mpz_class(v)});
  }
}

SparseIntMatrix SparseIntMatrix::from_dense(const IntMatrix& m) {
  SparseIntMatrix s(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      if (m.at(i, j) != 0) s.row[i].emplace_back(j, mpz_class(m.at(i, j)));
  return s;
}

namespace {

// Divides every entry of the row by the gcd of all entries.
void reduce_content(std::vector<std::pair<int, mpz_class>>& rw) {
  if (rw.empty()) return;
  mpz_class g = 0;
  for (const auto& [c, v] : rw) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    if (g == 1) return;
  }
  for (auto& [c, v] : rw) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
}

const mpz_class* find_col(const std::vector<std::pair<int, mpz_class>>& rw,
                          int col) {
  auto it = std::lower_bound(
      rw.begin(), rw.end(), col,
      [](const std::pair<int, mpz_class>& e, int c) { return e.first < c; });
  if (it != rw.end() && it->first == col) return &it->second;
  return nullptr;
}

// out = p * a - q * b, merged by column, zero entries dropped.
std::vector<std::pair<int, mpz_class>> combine(
    const mpz_class& p, const std::vector<std::pair<int, mpz_class>>& a,
    const mpz_class& q, const std::vector<std::pair<int, mpz_class>>& b) {
  std::vector<std::pair<int, mpz_class>> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  mpz_class t;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.emplace_back(a[i].first, p * a[i].second);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, -(q * b[j].second));
      ++j;
    } else {
      t = p * a[i].second - q * b[j].second;
      if (t != 0) out.emplace_back(a[i].first, t);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

int exact_rank(SparseIntMatrix m) {
  std::vector<char> active(m.rows, 1);
  std::vector<int> col_count(m.cols, 0);
  for (int i = 0; i < m.rows; ++i)
    for (const auto& [c, v] : m.row[i]) ++col_count[c];

  int rank = 0;
  for (;;) {
    // Sparsest active nonempty row.
    int pr = -1;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (int i = 0; i < m.rows; ++i) {
      if (!active[i] || m.row[i].empty()) continue;
      if (m.row[i].size() < best) {
        best = m.row[i].size();
        pr = i;
      }
    }
    if (pr < 0) break;

    // Least-occupied column within the pivot row.
    int pc = -1;
    int occ = std::numeric_limits<int>::max();
    for (const auto& [c, v] : m.row[pr])
      if (col_count[c] < occ) {
        occ = col_count[c];
        pc = c;
      }

    const mpz_class pivot = *find_col(m.row[pr], pc);
    for (int i = 0; i < m.rows; ++i) {
      if (!active[i] || i == pr) continue;
      const mpz_class* e = find_col(m.row[i], pc);
      if (!e) continue;
      for (const auto& [c, v] : m.row[i]) --col_count[c];
      m.row[i] = combine(pivot, m.row[i], *e, m.row[pr]);
      reduce_content(m.row[i]);
      for (const auto& [c, v] : m.row[i]) ++col_count[c];
    }
    for (const auto& [c, v] : m.row[pr]) --col_count[c];
    active[pr] = 0;
    m.row[pr].clear();
    ++rank;
  }
  return rank;
}

int exact_rank(const IntMatrix& m) {
  return exact_rank(SparseIntMatrix::from_dense(m));
}

}  // namespace klab

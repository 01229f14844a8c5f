#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <utility>
#include <vector>

namespace klab {

// Dense integer matrix with 64-bit entries, row major. Entries produced by
// the geometry are signed incidence counts; they never approach 2^63.
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> a;

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, 0) {}

  std::int64_t& at(int r, int c) { return a[std::size_t(r) * cols + c]; }
  std::int64_t at(int r, int c) const { return a[std::size_t(r) * cols + c]; }
};

IntMatrix multiply(const IntMatrix& x, const IntMatrix& y);
bool is_zero(const IntMatrix& m);

// Sparse integer matrix, one sorted (column, value) list per row. This is
// the working form for exact rank; values use arbitrary precision because
// fraction-free elimination grows entries into minors of the input.
struct SparseIntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::pair<int, mpz_class>>> row;

  SparseIntMatrix() = default;
  SparseIntMatrix(int r, int c) : rows(r), cols(c), row(r) {}

  // Accumulates v into (r, c); rows stay sorted by column.
  void add(int r, int c, std::int64_t v);

  static SparseIntMatrix from_dense(const IntMatrix& m);
};

// Rank over Q, computed by fraction-free row elimination: replacement rows
// are integer cross-combinations p*row_j - a_jc*row_r, reduced by their
// content gcd. Pivots are chosen Markowitz-style (sparsest row, then the
// least-occupied column in it) to limit fill-in. This is the ground-truth
// exact path; no floating point is involved.
int exact_rank(SparseIntMatrix m);
int exact_rank(const IntMatrix& m);

}  // namespace klab

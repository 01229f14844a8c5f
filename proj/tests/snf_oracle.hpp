#pragma once

// Test-only rank oracle, independent of the library's elimination path:
// reduces an integer matrix to Smith normal form by elementary row and
// column operations over Z and counts the nonzero diagonal entries.

#include <gmpxx.h>

#include <cstdlib>
#include <vector>

#include "klab/exact_linalg.hpp"

namespace snf {

inline int smith_rank(std::vector<std::vector<mpz_class>> m) {
  int rows = int(m.size());
  int cols = rows ? int(m[0].size()) : 0;
  int rank = 0;
  for (int t = 0; t < rows && t < cols; ++t) {
    // Locate the entry of least nonzero absolute value in the submatrix.
    int pr = -1, pc = -1;
    mpz_class best;
    for (int i = t; i < rows; ++i)
      for (int j = t; j < cols; ++j) {
        if (m[i][j] == 0) continue;
        mpz_class a = abs(m[i][j]);
        if (pr < 0 || a < best) {
          best = a;
          pr = i;
          pc = j;
        }
      }
    if (pr < 0) break;
    std::swap(m[t], m[pr]);
    for (int i = t; i < rows; ++i) std::swap(m[i][t], m[i][pc]);

    // Kill the pivot row and column; division with remainder may shrink the
    // pivot, in which case the scan restarts.
    bool again = true;
    while (again) {
      again = false;
      for (int i = t + 1; i < rows; ++i) {
        if (m[i][t] == 0) continue;
        mpz_class qv = m[i][t] / m[t][t];
        for (int j = t; j < cols; ++j) m[i][j] -= qv * m[t][j];
        if (m[i][t] != 0) {
          std::swap(m[t], m[i]);
          again = true;
        }
      }
      for (int j = t + 1; j < cols; ++j) {
        if (m[t][j] == 0) continue;
        mpz_class qv = m[t][j] / m[t][t];
        for (int i = t; i < rows; ++i) m[i][j] -= qv * m[i][t];
        if (m[t][j] != 0) {
          for (int i = t; i < rows; ++i) std::swap(m[i][t], m[i][j]);
          again = true;
        }
      }
    }
    ++rank;
  }
  return rank;
}

inline int smith_rank(const klab::IntMatrix& m) {
  std::vector<std::vector<mpz_class>> w(m.rows, std::vector<mpz_class>(m.cols));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) w[i][j] = m.at(i, j);
  return smith_rank(std::move(w));
}

}  // namespace snf

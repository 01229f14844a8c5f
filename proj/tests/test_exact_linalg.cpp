#include "klab/exact_linalg.hpp"

#include <random>

#include "doctest.h"
#include "klab/errors.hpp"
#include "klab/rational.hpp"
#include "snf_oracle.hpp"

using klab::IntMatrix;
using klab::Rational;
using klab::SparseIntMatrix;

namespace {

IntMatrix random_matrix(int rows, int cols, int lo, int hi, std::mt19937_64& rng,
                        double density = 1.0) {
  IntMatrix m(rows, cols);
  std::uniform_int_distribution<int> val(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (coin(rng) <= density) m.at(i, j) = val(rng);
  return m;
}

}  // namespace

TEST_CASE("rank of fixed small matrices") {
  IntMatrix id(3, 3);
  for (int i = 0; i < 3; ++i) id.at(i, i) = 1;
  CHECK(klab::exact_rank(id) == 3);

  IntMatrix zero(4, 5);
  CHECK(klab::exact_rank(zero) == 0);

  // Rank 1: outer product of two vectors.
  IntMatrix outer(3, 4);
  int u[3] = {1, -2, 3}, v[4] = {2, 0, -1, 5};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) outer.at(i, j) = u[i] * v[j];
  CHECK(klab::exact_rank(outer) == 1);

  // Integer rank can exceed the mod-2 rank; elimination must work over Q.
  IntMatrix twos(2, 2);
  twos.at(0, 0) = 2;
  twos.at(1, 1) = 2;
  CHECK(klab::exact_rank(twos) == 2);
}

TEST_CASE("rank matches the Smith normal form oracle on random matrices") {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 60; ++trial) {
    int rows = 1 + int(rng() % 8);
    int cols = 1 + int(rng() % 8);
    IntMatrix m = random_matrix(rows, cols, -4, 4, rng, 0.7);
    CHECK(klab::exact_rank(m) == snf::smith_rank(m));
  }
}

TEST_CASE("rank matches the oracle on rank-deficient constructions") {
  std::mt19937_64 rng(987654);
  for (int trial = 0; trial < 25; ++trial) {
    // Product of (n x k) and (k x n) has rank at most k.
    int n = 4 + int(rng() % 5);
    int k = 1 + int(rng() % 3);
    IntMatrix a = random_matrix(n, k, -3, 3, rng);
    IntMatrix b = random_matrix(k, n, -3, 3, rng);
    IntMatrix p = klab::multiply(a, b);
    int r = klab::exact_rank(p);
    CHECK(r <= k);
    CHECK(r == snf::smith_rank(p));
  }
}

TEST_CASE("sparse accumulation cancels to zero entries") {
  SparseIntMatrix s(2, 2);
  s.add(0, 0, 5);
  s.add(0, 0, -5);
  s.add(0, 1, 3);
  CHECK(s.row[0].size() == 1);
  CHECK(klab::exact_rank(s) == 1);
}

TEST_CASE("rational arithmetic normalizes and compares") {
  Rational a(34, 16);
  CHECK(a.num() == 17);
  CHECK(a.den() == 8);
  CHECK(a.str() == "17/8");
  CHECK(Rational(2, 1) - Rational(1, 4) == Rational(7, 4));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK(Rational(9, 4) < Rational(5, 2));
  CHECK((Rational(17, 8) * Rational(8, 17)) == Rational(1));
  CHECK_THROWS_AS(Rational(1, 0), klab::validation_error);
}

#include <gtest/gtest.h>

#include "noncelab/errors.hpp"
#include "noncelab/lattice.hpp"
#include "noncelab/rng.hpp"

using namespace noncelab;

namespace {

LatticeBasis basis(std::vector<std::vector<long>> rows) {
  LatticeBasis b;
  for (const auto& r : rows) {
    b.rows.emplace_back();
    for (long v : r) b.rows.back().push_back(v);
  }
  return b;
}

mpz_class det2(const std::vector<std::vector<mpz_class>>& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

mpz_class det(std::vector<std::vector<mpq_class>> m) {
  const size_t n = m.size();
  mpq_class d = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) std::swap(m[p], m[c]), d = -d;
    d *= m[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      const mpq_class f = m[r][c] / m[c][c];
      for (size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return mpz_class(d);
}

// Shortest nonzero vector of a 2D lattice by enumeration of small coefficients.
mpz_class shortest_2d(const LatticeBasis& b, long range) {
  mpz_class best = -1;
  for (long x = -range; x <= range; ++x)
    for (long y = -range; y <= range; ++y) {
      if (!x && !y) continue;
      std::vector<mpz_class> v{x * b.rows[0][0] + y * b.rows[1][0], x * b.rows[0][1] + y * b.rows[1][1]};
      const mpz_class n = squared_norm(v);
      if (best < 0 || n < best) best = n;
    }
  return best;
}

}  // namespace

TEST(Lll, TwoDimensionalExample) {
  const LatticeBasis b = basis({{201, 37}, {1648, 297}});
  const LllResult r = lll_reduce(b, 99, 100, true);
  EXPECT_TRUE(is_lll_reduced(r.basis));
  EXPECT_EQ(squared_norm(r.basis.rows[0]), 1 * 1 + 32 * 32);
  EXPECT_EQ(squared_norm(r.basis.rows[0]), shortest_2d(b, 60));
  EXPECT_EQ(abs(det2(r.basis.rows)), abs(det2(b.rows)));
  EXPECT_EQ(abs(det2(r.transform)), 1);
}

TEST(Lll, OrthogonalBasisUnchanged) {
  const LatticeBasis b = basis({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
  const LllResult r = lll_reduce(b);
  EXPECT_EQ(r.basis.rows, b.rows);
  EXPECT_EQ(r.swaps, 0u);
}

TEST(Lll, RandomBasesReducedAndUnimodular) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t n = 6;
    LatticeBasis b;
    b.rows.assign(n, std::vector<mpz_class>(n));
    for (auto& row : b.rows)
      for (auto& v : row) v = mpz_class(static_cast<long>(rng.below(2000))) - 1000;
    std::vector<std::vector<mpq_class>> q(n, std::vector<mpq_class>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) q[i][j] = b.rows[i][j];
    if (det(q) == 0) continue;
    const LllResult r = lll_reduce(b, 99, 100, true);
    EXPECT_TRUE(is_lll_reduced(r.basis));
    // reduced = U * input with |det U| = 1
    std::vector<std::vector<mpq_class>> u(n, std::vector<mpq_class>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        u[i][j] = r.transform[i][j];
        mpz_class s = 0;
        for (size_t k = 0; k < n; ++k) s += r.transform[i][k] * b.rows[k][j];
        EXPECT_EQ(s, r.basis.rows[i][j]);
      }
    EXPECT_EQ(abs(det(u)), 1);
    // the first vector only ever shrinks, and |b*_i|^2 >= (delta - 1/4) |b*_{i-1}|^2
    EXPECT_LE(squared_norm(r.basis.rows[0]), squared_norm(b.rows[0]));
    const auto gs = gram_schmidt_norms(r.basis);
    for (size_t i = 1; i < n; ++i) EXPECT_GE(gs[i], gs[i - 1] * mpq_class(74, 100));
  }
}

TEST(Lll, RejectsDependentOrRaggedRows) {
  EXPECT_THROW(lll_reduce(basis({{1, 2}, {2, 4}})), DomainError);
  EXPECT_THROW(lll_reduce(basis({{1, 2}, {3}})), DomainError);
  EXPECT_FALSE(is_lll_reduced(basis({{1648, 297}, {201, 37}})));
}

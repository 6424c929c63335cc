#pragma once

#include <optional>
#include <vector>

#include <gmpxx.h>

namespace noncelab {

/// Integer lattice basis, one basis vector per row.
struct LatticeBasis {
  std::vector<std::vector<mpz_class>> rows;
  /// Column weights applied when the basis was built (informational).
  std::vector<mpz_class> scale;

  size_t dimension() const { return rows.size(); }
  size_t columns() const { return rows.empty() ? 0 : rows.front().size(); }
};

struct LllResult {
  LatticeBasis basis;
  /// Unimodular U with reduced = U * input; empty unless requested.
  std::vector<std::vector<mpz_class>> transform;
  size_t swaps = 0;
};

/// Exact integral LLL (Gram-Schmidt quantities kept as integers) with
/// delta = delta_num / delta_den in (1/4, 1]. Throws DomainError when the
/// rows are linearly dependent or the basis is ragged.
LllResult lll_reduce(const LatticeBasis& basis, long delta_num = 99, long delta_den = 100,
                     bool track_transform = false);

/// Squared Gram-Schmidt norms as exact rationals.
std::vector<mpq_class> gram_schmidt_norms(const LatticeBasis& basis);

/// True when every |mu_ij| <= 1/2 and the Lovasz condition holds for all
/// consecutive pairs.
bool is_lll_reduced(const LatticeBasis& basis, long delta_num = 99, long delta_den = 100);

mpz_class squared_norm(const std::vector<mpz_class>& v);

}  // namespace noncelab

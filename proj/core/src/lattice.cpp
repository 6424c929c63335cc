#include "noncelab/lattice.hpp"

#include "noncelab/errors.hpp"

namespace noncelab {

namespace {

mpz_class dot(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
  mpz_class s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_shape(const LatticeBasis& b) {
  if (b.rows.empty()) throw DomainError("empty lattice basis");
  for (const auto& r : b.rows)
    if (r.size() != b.columns()) throw DomainError("ragged lattice basis");
}

// round(a / b) for b > 0, halves away from -infinity
mpz_class round_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  const mpz_class num = 2 * a + b;
  const mpz_class den = 2 * b;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return q;
}

// Integral LLL after Cohen, "A Course in Computational Algebraic Number
// Theory", Alg. 2.6.7. Indices are 1-based; d[0] = 1.
class IntegralLll {
 public:
  IntegralLll(std::vector<std::vector<mpz_class>> rows, long p, long q, bool track)
      : b_(std::move(rows)), n_(b_.size()), p_(p), q_(q), track_(track), d_(n_ + 1), lam_(n_ + 1) {
    for (auto& r : lam_) r.assign(n_ + 1, 0);
    if (track_) {
      u_.assign(n_, std::vector<mpz_class>(n_, 0));
      for (size_t i = 0; i < n_; ++i) u_[i][i] = 1;
    }
  }

  void run() {
    d_[0] = 1;
    d_[1] = dot(b_[0], b_[0]);
    if (d_[1] == 0) throw DomainError("lattice rows are linearly dependent");
    size_t k = 2, kmax = 1;
    while (k <= n_) {
      if (k > kmax) {
        kmax = k;
        for (size_t j = 1; j <= k; ++j) {
          mpz_class u = dot(b_[k - 1], b_[j - 1]);
          for (size_t i = 1; i < j; ++i) u = (d_[i] * u - lam_[k][i] * lam_[j][i]) / d_[i - 1];
          if (j < k)
            lam_[k][j] = u;
          else
            d_[k] = u;
        }
        if (d_[k] == 0) throw DomainError("lattice rows are linearly dependent");
      }
      reduce(k, k - 1);
      if (q_ * (d_[k] * d_[k - 2] + lam_[k][k - 1] * lam_[k][k - 1]) < p_ * d_[k - 1] * d_[k - 1]) {
        swap(k, kmax);
        if (k > 2) --k;
      } else {
        for (size_t l = k - 2; l >= 1; --l) reduce(k, l);
        ++k;
      }
    }
  }

  std::vector<std::vector<mpz_class>> b_;
  std::vector<std::vector<mpz_class>> u_;
  size_t swaps = 0;

 private:
  void reduce(size_t k, size_t l) {
    if (2 * abs(lam_[k][l]) <= d_[l]) return;
    const mpz_class q = round_div(lam_[k][l], d_[l]);
    auto& bk = b_[k - 1];
    const auto& bl = b_[l - 1];
    for (size_t c = 0; c < bk.size(); ++c) bk[c] -= q * bl[c];
    if (track_)
      for (size_t c = 0; c < n_; ++c) u_[k - 1][c] -= q * u_[l - 1][c];
    lam_[k][l] -= q * d_[l];
    for (size_t i = 1; i < l; ++i) lam_[k][i] -= q * lam_[l][i];
  }

  void swap(size_t k, size_t kmax) {
    ++swaps;
    std::swap(b_[k - 1], b_[k - 2]);
    if (track_) std::swap(u_[k - 1], u_[k - 2]);
    for (size_t j = 1; j + 1 < k; ++j) std::swap(lam_[k][j], lam_[k - 1][j]);
    const mpz_class lam = lam_[k][k - 1];
    const mpz_class B = (d_[k - 2] * d_[k] + lam * lam) / d_[k - 1];
    for (size_t i = k + 1; i <= kmax; ++i) {
      const mpz_class t = lam_[i][k];
      lam_[i][k] = (d_[k] * lam_[i][k - 1] - lam * t) / d_[k - 1];
      lam_[i][k - 1] = (B * t + lam * lam_[i][k]) / d_[k];
    }
    d_[k - 1] = B;
  }

  size_t n_;
  long p_, q_;
  bool track_;
  std::vector<mpz_class> d_;
  std::vector<std::vector<mpz_class>> lam_;
};

}  // namespace

mpz_class squared_norm(const std::vector<mpz_class>& v) { return dot(v, v); }

LllResult lll_reduce(const LatticeBasis& basis, long delta_num, long delta_den, bool track_transform) {
  check_shape(basis);
  if (delta_den <= 0 || 4 * delta_num <= delta_den || delta_num > delta_den)
    throw DomainError("LLL delta must lie in (1/4, 1]");
  IntegralLll lll(basis.rows, delta_num, delta_den, track_transform);
  if (basis.dimension() > 1) lll.run();
  else if (squared_norm(basis.rows.front()) == 0)
    throw DomainError("lattice rows are linearly dependent");
  LllResult r;
  r.basis.rows = std::move(lll.b_);
  r.basis.scale = basis.scale;
  r.transform = std::move(lll.u_);
  r.swaps = lll.swaps;
  return r;
}

namespace {

struct GramSchmidt {
  std::vector<std::vector<mpq_class>> mu;
  std::vector<mpq_class> norms;
};

GramSchmidt gram_schmidt(const LatticeBasis& basis) {
  check_shape(basis);
  const size_t n = basis.dimension(), m = basis.columns();
  GramSchmidt g;
  g.mu.assign(n, std::vector<mpq_class>(n, 0));
  g.norms.assign(n, 0);
  std::vector<std::vector<mpq_class>> bs(n, std::vector<mpq_class>(m));
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 0; c < m; ++c) bs[i][c] = basis.rows[i][c];
    for (size_t j = 0; j < i; ++j) {
      mpq_class num = 0;
      for (size_t c = 0; c < m; ++c) num += mpq_class(basis.rows[i][c]) * bs[j][c];
      g.mu[i][j] = num / g.norms[j];
      for (size_t c = 0; c < m; ++c) bs[i][c] -= g.mu[i][j] * bs[j][c];
    }
    for (size_t c = 0; c < m; ++c) g.norms[i] += bs[i][c] * bs[i][c];
    if (g.norms[i] == 0) throw DomainError("lattice rows are linearly dependent");
  }
  return g;
}

}  // namespace

std::vector<mpq_class> gram_schmidt_norms(const LatticeBasis& basis) { return gram_schmidt(basis).norms; }

bool is_lll_reduced(const LatticeBasis& basis, long delta_num, long delta_den) {
  const GramSchmidt g = gram_schmidt(basis);
  const mpq_class half(1, 2), delta(delta_num, delta_den);
  for (size_t i = 0; i < g.norms.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (abs(g.mu[i][j]) > half) return false;
  for (size_t k = 1; k < g.norms.size(); ++k)
    if (g.norms[k] < (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.norms[k - 1]) return false;
  return true;
}

}  // namespace noncelab

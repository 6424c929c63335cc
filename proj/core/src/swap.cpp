#include "noncelab/swap.hpp"

#include <bit>
#include <numeric>
#include <string>

#include "noncelab/errors.hpp"

namespace noncelab {

std::string_view to_string(SwapKind kind) {
  switch (kind) {
    case SwapKind::Plain: return "plain";
    case SwapKind::Libgcrypt: return "libgcrypt";
    case SwapKind::Masked: return "masked";
    case SwapKind::Combined: return "combined";
  }
  return "?";
}

SwapKind parse_swap_kind(std::string_view text) {
  if (text == "plain") return SwapKind::Plain;
  if (text == "libgcrypt") return SwapKind::Libgcrypt;
  if (text == "masked") return SwapKind::Masked;
  if (text == "combined") return SwapKind::Combined;
  throw ConfigError("unknown swap variant: " + std::string(text));
}

namespace {

uint32_t hw(uint64_t x) { return static_cast<uint32_t>(std::popcount(x)); }
uint32_t hd(uint64_t x, uint64_t y) { return hw(x ^ y); }

void note(EventRecorder* rec, OpKind op, uint32_t leak) {
  if (rec) rec->emit(op, leak);
}

void swap_plain(WordArrayPair& p, uint64_t mask, EventRecorder* rec) {
  note(rec, OpKind::MaskCompute, hw(mask));
  for (size_t i = 0; i < p.size(); ++i) {
    const uint64_t delta = (p.a[i] ^ p.b[i]) & mask;
    note(rec, OpKind::DeltaCompute, hw(delta));
    const uint64_t na = p.a[i] ^ delta;
    const uint64_t nb = p.b[i] ^ delta;
    note(rec, OpKind::StoreA, hd(p.a[i], na));
    note(rec, OpKind::StoreB, hd(p.b[i], nb));
    p.a[i] = na;
    p.b[i] = nb;
  }
}

void swap_libgcrypt(WordArrayPair& p, uint64_t mask, EventRecorder* rec) {
  const uint64_t inv = ~mask;
  note(rec, OpKind::MaskCompute, hw(mask));
  note(rec, OpKind::InvMaskCompute, hw(inv));
  for (size_t i = 0; i < p.size(); ++i) {
    const uint64_t d0 = (p.a[i] & inv) | (p.b[i] & mask);
    note(rec, OpKind::DeltaCompute, hw(d0));
    const uint64_t d1 = (p.a[i] & mask) | (p.b[i] & inv);
    note(rec, OpKind::DeltaCompute, hw(d1));
    note(rec, OpKind::StoreA, hd(p.a[i], d0));
    note(rec, OpKind::StoreB, hd(p.b[i], d1));
    p.a[i] = d0;
    p.b[i] = d1;
  }
}

void swap_masked(WordArrayPair& p, uint64_t mask, Rng& rng, EventRecorder* rec) {
  const uint64_t r = rng.next_u64();
  note(rec, OpKind::MaskCompute, hw(mask));
  for (size_t i = 0; i < p.size(); ++i) {
    const uint64_t delta = ((p.a[i] ^ p.b[i]) & mask) ^ r;
    note(rec, OpKind::DeltaCompute, hw(delta));
    const uint64_t na = (p.a[i] ^ delta) ^ r;
    const uint64_t nb = (p.b[i] ^ delta) ^ r;
    note(rec, OpKind::StoreA, hd(p.a[i], na));
    note(rec, OpKind::StoreB, hd(p.b[i], nb));
    p.a[i] = na;
    p.b[i] = nb;
  }
}

// Destination buffers live at freshly randomised addresses, so each store
// overwrites unrelated memory; the word order is permuted per invocation.
void swap_combined(WordArrayPair& p, uint64_t mask, Rng& rng, EventRecorder* rec) {
  const uint64_t r = rng.next_u64();
  note(rec, OpKind::MaskCompute, hw(mask ^ r));
  std::vector<size_t> order(p.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (size_t i : order) {
    const uint64_t delta = ((p.a[i] ^ p.b[i]) & mask) ^ r;
    note(rec, OpKind::DeltaCompute, hw(delta));
    const uint64_t na = (p.a[i] ^ delta) ^ r;
    const uint64_t nb = (p.b[i] ^ delta) ^ r;
    const uint64_t prior_a = rng.next_u64();
    const uint64_t prior_b = rng.next_u64();
    note(rec, OpKind::StoreA, hd(prior_a, na));
    note(rec, OpKind::StoreB, hd(prior_b, nb));
    p.a[i] = na;
    p.b[i] = nb;
  }
}

}  // namespace

WordArrayPair ct_swap(const SwapVariant& variant, WordArrayPair pair, unsigned cond,
                      EventRecorder* rec, Rng* rng) {
  if (pair.a.size() != pair.b.size()) throw DomainError("swap operands differ in length");
  if (cond > 1) throw DomainError("swap condition must be 0 or 1");
  if (variant.needs_randomness() && rng == nullptr)
    throw DomainError(std::string(to_string(variant.kind)) + " swap requires a random stream");
  const uint64_t mask = 0ULL - static_cast<uint64_t>(cond);
  switch (variant.kind) {
    case SwapKind::Plain: swap_plain(pair, mask, rec); break;
    case SwapKind::Libgcrypt: swap_libgcrypt(pair, mask, rec); break;
    case SwapKind::Masked: swap_masked(pair, mask, *rng, rec); break;
    case SwapKind::Combined: swap_combined(pair, mask, *rng, rec); break;
  }
  return pair;
}

size_t swap_event_count(SwapKind kind, size_t word_count) {
  return kind == SwapKind::Libgcrypt ? 2 + 4 * word_count : 1 + 3 * word_count;
}

ProjectivePoint rerandomize_coords(const ProjectivePoint& P, const CurveParams& curve,
                                   const FieldElement& lambda, EventRecorder* rec) {
  if (P.is_identity()) throw DomainError("cannot re-randomise the neutral element");
  if (lambda.is_zero()) throw DomainError("re-randomisation factor must be non-zero");
  ProjectivePoint out{P.X * lambda, P.Y * lambda, P.Z * lambda};
  if (rec) {
    for (const FieldElement* c : {&out.X, &out.Y, &out.Z})
      for (uint64_t w : to_words(c->value(), curve.word_count())) rec->emit(OpKind::Rerandomize, hw(w));
  }
  return out;
}

ProjectivePoint rerandomize_coords(const ProjectivePoint& P, const CurveParams& curve, Rng& rng,
                                   EventRecorder* rec) {
  if (P.is_identity()) throw DomainError("cannot re-randomise the neutral element");
  return rerandomize_coords(P, curve, curve.fe(rng.nonzero_below(curve.p())), rec);
}

Rational::Rational(int64_t n, int64_t d) : num(n), den(d) {
  if (den == 0) throw DomainError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational operator+(Rational a, Rational b) { return Rational(a.num * b.den + b.num * a.den, a.den * b.den); }
Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }

ExpectedLeak expected_leak_delta(const SwapVariant& variant, size_t word_count, unsigned cond) {
  if (word_count < 1) throw DomainError("word_count must be positive");
  if (cond > 1) throw DomainError("swap condition must be 0 or 1");
  const int64_t c = cond;
  ExpectedLeak e;
  switch (variant.kind) {
    case SwapKind::Plain:
      e = {64 * c, 0, 32 * c, 32 * c, 32 * c, 0};
      break;
    case SwapKind::Libgcrypt:
      // delta0/delta1 hold one operand each: 32 + 32 regardless of cond.
      e = {64 * c, 64 * (1 - c), 64, 32 * c, 32 * c, 0};
      break;
    case SwapKind::Masked:
      e = {64 * c, 0, 32, 32 * c, 32 * c, 0};
      break;
    case SwapKind::Combined:
      e = {32, 0, 32, 32, 32, 0};
      break;
  }
  const Rational per_word = e.delta_per_word + e.store_a_per_word + e.store_b_per_word;
  e.total = e.mask + e.inv_mask + per_word * Rational(static_cast<int64_t>(word_count));
  return e;
}

namespace {

void swap_coordinate(const SwapVariant& variant, FieldElement& x, FieldElement& y, unsigned cond,
                     const CurveParams& curve, EventRecorder* rec, Rng* rng) {
  const size_t wc = curve.word_count();
  WordArrayPair pair{to_words(x.value(), wc), to_words(y.value(), wc)};
  pair = ct_swap(variant, std::move(pair), cond, rec, rng);
  const size_t vw = curve.value_words();
  x = curve.fe(from_words(std::span<const uint64_t>(pair.a).first(vw)));
  y = curve.fe(from_words(std::span<const uint64_t>(pair.b).first(vw)));
}

ProjectivePoint scale(const ProjectivePoint& P, const CurveParams& curve, Rng& rng,
                      EventRecorder* rec) {
  // Ladder states may hold an x-only neutral element (X : Y : 0); scaling it
  // is still a valid change of representative.
  const FieldElement lambda = curve.fe(rng.nonzero_below(curve.p()));
  ProjectivePoint out{P.X * lambda, P.Y * lambda, P.Z * lambda};
  if (rec)
    for (const FieldElement* c : {&out.X, &out.Y, &out.Z})
      for (uint64_t w : to_words(c->value(), curve.word_count())) rec->emit(OpKind::Rerandomize, hw(w));
  return out;
}

}  // namespace

void swap_points(const SwapVariant& variant, ProjectivePoint& P, ProjectivePoint& Q, unsigned cond,
                 const CurveParams& curve, EventRecorder* rec, Rng* rng) {
  if (rec) rec->begin_swap(static_cast<int>(cond));
  if (variant.kind == SwapKind::Combined) {
    if (rng == nullptr) throw DomainError("combined swap requires a random stream");
    P = scale(P, curve, *rng, rec);
    Q = scale(Q, curve, *rng, rec);
  }
  swap_coordinate(variant, P.X, Q.X, cond, curve, rec, rng);
  swap_coordinate(variant, P.Y, Q.Y, cond, curve, rec, rng);
  swap_coordinate(variant, P.Z, Q.Z, cond, curve, rec, rng);
  if (rec) rec->end_swap();
}

}  // namespace noncelab

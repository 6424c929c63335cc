#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "noncelab/curve.hpp"
#include "noncelab/events.hpp"
#include "noncelab/rng.hpp"

namespace noncelab {

/// Conditional-swap implementations.
///   Plain     mask = 0 - cond, delta = (a ^ b) & mask, xor delta into both.
///   Libgcrypt mask and ~mask computed separately, both words rebuilt with and/or.
///   Masked    Plain with one random word r folded into delta and the stores.
///   Combined  Masked, with masked mask computation, per-word address
///             randomisation and coordinate re-randomisation before the swap.
enum class SwapKind : uint8_t { Plain, Libgcrypt, Masked, Combined };

std::string_view to_string(SwapKind kind);
/// Accepts plain | libgcrypt | masked | combined. Throws ConfigError.
SwapKind parse_swap_kind(std::string_view text);

struct SwapVariant {
  SwapKind kind = SwapKind::Plain;
  /// Seed of the swap's private randomness (Masked/Combined); used when the
  /// caller does not supply a stream.
  std::optional<uint64_t> rng_seed;

  bool needs_randomness() const { return kind == SwapKind::Masked || kind == SwapKind::Combined; }
};

struct WordArrayPair {
  std::vector<uint64_t> a;
  std::vector<uint64_t> b;

  size_t size() const { return a.size(); }
  friend bool operator==(const WordArrayPair&, const WordArrayPair&) = default;
};

/// Swaps a and b when cond == 1 and leaves them otherwise, emitting the
/// variant's event sequence to `rec`. `rng` is required for Masked/Combined.
/// Throws DomainError on length mismatch or cond outside {0, 1}.
WordArrayPair ct_swap(const SwapVariant& variant, WordArrayPair pair, unsigned cond,
                      EventRecorder* rec, Rng* rng);

/// Number of events one ct_swap emits; independent of cond and operands.
size_t swap_event_count(SwapKind kind, size_t word_count);

/// (lambda X : lambda Y : lambda Z) for a uniformly random lambda != 0.
/// Emits one Rerandomize event per output word. Throws DomainError on the
/// neutral element.
ProjectivePoint rerandomize_coords(const ProjectivePoint& P, const CurveParams& curve, Rng& rng,
                                   EventRecorder* rec = nullptr);
ProjectivePoint rerandomize_coords(const ProjectivePoint& P, const CurveParams& curve,
                                   const FieldElement& lambda, EventRecorder* rec = nullptr);

/// Exact rational; only what the closed-form leak expectations need.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational() = default;
  Rational(int64_t n, int64_t d = 1);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Expected leak value per event class of one ct_swap, assuming uniformly
/// random operand words. Per-word entries sum over all events of that class
/// for one word (Libgcrypt emits two DeltaCompute events per word).
struct ExpectedLeak {
  Rational mask;
  Rational inv_mask;
  Rational delta_per_word;
  Rational store_a_per_word;
  Rational store_b_per_word;
  Rational total;
};

ExpectedLeak expected_leak_delta(const SwapVariant& variant, size_t word_count, unsigned cond);

/// Swaps two points coordinate-wise (X, Y, Z), each coordinate encoded in
/// curve.word_count() words, inside one recorder swap segment. For Combined,
/// both points are re-randomised first.
void swap_points(const SwapVariant& variant, ProjectivePoint& P, ProjectivePoint& Q, unsigned cond,
                 const CurveParams& curve, EventRecorder* rec, Rng* rng);

}  // namespace noncelab

#pragma once

#include <string_view>
#include <utility>

#include "noncelab/curve.hpp"
#include "noncelab/events.hpp"
#include "noncelab/rng.hpp"
#include "noncelab/swap.hpp"

namespace noncelab {

enum class Multiplier : uint8_t { Ladder, DoubleAndAlwaysAdd };

std::string_view to_string(Multiplier m);
/// Accepts "ladder" and "daa". Throws ConfigError.
Multiplier parse_multiplier(std::string_view text);

/// One differential addition-and-doubling step on x-only (X : Z) states:
/// s' = r + s, r' = 2r, given that r - s = +-base. Y coordinates pass through.
/// Emits 20 multiply/square events in groups 5-2-1-2-3-1-3-3 separated by
/// add/sub/shift events. Throws DomainError when a state coordinate has no
/// point on the curve.
std::pair<ProjectivePoint, ProjectivePoint> ladder_step(const ProjectivePoint& s,
                                                        const ProjectivePoint& r,
                                                        const AffinePoint& base,
                                                        const CurveParams& curve,
                                                        EventRecorder* rec = nullptr);

struct MultOptions {
  SwapVariant swap;
  EventRecorder* recorder = nullptr;
  /// Randomness for swap masks, coordinate blinding and Combined. When null
  /// and the variant needs randomness, a stream is derived from
  /// swap.rng_seed (or the system entropy source).
  Rng* rng = nullptr;
};

/// Montgomery ladder with merged swap conditions k_i xor k_{i+1} (k_b = 0),
/// recording exactly b = bitlen(n) swaps. Requires 1 <= k <= n-1.
AffinePoint montgomery_ladder(const Scalar& k, const AffinePoint& base, const CurveParams& curve,
                              const MultOptions& opt = {});

/// Double-and-always-add: per bit one doubling, one addition and one swap
/// with condition k_i, MSB first. Requires 1 <= k <= n-1.
AffinePoint double_and_always_add(const Scalar& k, const ProjectivePoint& P,
                                  const CurveParams& curve, const MultOptions& opt = {});

AffinePoint scalar_multiply(Multiplier m, const Scalar& k, const AffinePoint& base,
                            const CurveParams& curve, const MultOptions& opt = {});

/// Swap conditions a multiplier records for k, in recording order.
std::vector<int> swap_conditions(Multiplier m, const Scalar& k);

namespace detail {
/// As above without the scalar range check; profiling uses nonces such as
/// 2^b - 1 that exceed n. Any k >= 0 with bitlen(k) <= k.bit_length.
AffinePoint scalar_multiply_unchecked(Multiplier m, const Scalar& k, const AffinePoint& base,
                                      const CurveParams& curve, const MultOptions& opt);
}  // namespace detail

}  // namespace noncelab

#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "noncelab/curve.hpp"
#include "noncelab/rng.hpp"
#include "noncelab/scalar_mult.hpp"

namespace noncelab {

struct KeyPair {
  Scalar d;       // zero width for public-only keys
  AffinePoint Q;  // d * G
};

struct Signature {
  mpz_class r;
  mpz_class s;
  mpz_class z;  // digest, supplied by the caller
};

struct NonceRecord {
  Scalar k;
  Signature signature;
};

/// Uniform d in [1, n-1].
KeyPair keygen(const CurveParams& curve, Rng& rng);
/// Throws DomainError unless 1 <= d <= n-1.
KeyPair keypair_from_private(const mpz_class& d, const CurveParams& curve);

struct SignOptions {
  Multiplier multiplier = Multiplier::Ladder;
  SwapVariant swap;
  /// Receives the events of the nonce multiplication (of the accepted
  /// attempt only).
  EventRecorder* recorder = nullptr;
  /// Returns the nonce alongside the signature.
  bool lab_mode = false;
  /// Fixed nonce; DomainError if it yields r = 0 or s = 0.
  std::optional<mpz_class> forced_nonce;
};

struct SignResult {
  Signature signature;
  std::optional<NonceRecord> nonce;  // lab mode only
};

/// r = x(kG) mod n, s = k^-1 (z + r d) mod n, retried while r or s is zero.
SignResult sign(const mpz_class& z, const KeyPair& key, const CurveParams& curve, Rng& rng,
                const SignOptions& opt = {});

bool verify(const mpz_class& z, const Signature& sig, const AffinePoint& Q, const CurveParams& curve);
inline bool verify(const Signature& sig, const AffinePoint& Q, const CurveParams& curve) {
  return verify(sig.z, sig, Q, curve);
}

/// d = (s k - z) r^-1 mod n. Throws NonInvertible when r is not invertible.
Scalar recover_private_key(const Scalar& k, const Signature& sig, const CurveParams& curve);

// Line-oriented hex text: "d=<hex>", "qx=<hex>", "qy=<hex>" for keys and
// "r=<hex> s=<hex> z=<hex>" per signature.
void write_key(std::ostream& out, const KeyPair& key, bool include_private = true);
KeyPair read_key(std::istream& in, const CurveParams& curve);
void write_signature(std::ostream& out, const Signature& sig);
std::vector<Signature> read_signatures(std::istream& in);

}  // namespace noncelab

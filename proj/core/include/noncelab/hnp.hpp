#pragma once

#include <optional>
#include <string>
#include <vector>

#include "noncelab/curve.hpp"
#include "noncelab/ecdsa.hpp"
#include "noncelab/lattice.hpp"
#include "noncelab/rng.hpp"

namespace noncelab {

/// A signature together with the l least significant bits a of its nonce.
struct LeakRecord {
  Signature signature;
  mpz_class known_lsbs;
  size_t leak_bits = 0;
  /// Optional per-bit confidence in [0.5, 1], least significant bit first.
  std::vector<double> confidence;
};

/// b_i = t_i d + u_i (mod n) with 0 <= b_i < n / 2^l_i, where
/// k_i = a_i + 2^l_i b_i.
struct HnpSample {
  mpz_class t;
  mpz_class u;
  size_t leak_bits;
};

struct HnpInstance {
  mpz_class n;
  std::vector<HnpSample> samples;
  std::vector<LeakRecord> records;
};

/// Throws DomainError on l_i < 1, a_i >= 2^l_i or l_i > bitlen(n), and
/// NonInvertible when s_i has no inverse mod n.
HnpInstance build_hnp(const std::vector<LeakRecord>& records, const CurveParams& curve);

/// Kannan embedding in dimension m + 2. With S_i = 2^(l_i + 1) and the
/// centred c_i = floor(n / 2^(l_i + 1)), the rows are
///   S_i n e_i                         (i = 1..m)
///   (S_1 t_1, ..., S_m t_m, 1, 0)
///   (S_1 (u_1 - c_1), ..., S_m (u_m - c_m), 0, E)
/// and (S_i (b_i - c_i), d, E) is a lattice vector whose coordinates are all
/// at most n in size. E = embedding_weight * floor(n / 2).
LatticeBasis build_lattice(const HnpInstance& inst, unsigned embedding_weight = 1);

struct RecoveryStrategy {
  enum class Kind { Direct, SubsetRetry };
  Kind kind = Kind::Direct;
  size_t max_tries = 0;
  uint64_t seed = 0;

  static RecoveryStrategy direct() { return {}; }
  static RecoveryStrategy subset_retry(size_t tries, uint64_t seed = 0) {
    return {Kind::SubsetRetry, tries, seed};
  }
};

struct KeyRecovery {
  mpz_class d;
  size_t attempts = 0;
  double max_lll_seconds = 0;
};

/// Reduces the embedding lattice and checks every candidate from the
/// reduced rows against Q; nothing is reported without d G == Q. Subset
/// retry re-solves on random signature subsets, truncating the known bits
/// at low-confidence positions when confidences are present. Throws
/// RecoveryFailed when every attempt fails.
KeyRecovery recover_key(const HnpInstance& inst, const CurveParams& curve, const AffinePoint& Q,
                        const RecoveryStrategy& strategy = RecoveryStrategy::direct(),
                        unsigned embedding_weight = 1);

// "r=<hex> s=<hex> z=<hex> l=<dec> a=<hex>" per line.
void write_leak_records(std::ostream& out, const std::vector<LeakRecord>& records);
std::vector<LeakRecord> read_leak_records(std::istream& in);

}  // namespace noncelab

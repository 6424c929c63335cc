#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <gmpxx.h>

namespace noncelab {

/// Seedable random stream. A seeded stream is fully reproducible; an
/// unseeded one draws its seed from the system entropy source.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  /// Seeds from std::random_device. Throws RngError if no entropy is available.
  static Rng from_entropy();

  uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, bound). bound must be positive.
  uint64_t below(uint64_t bound);
  /// Uniform in [0, bound) for arbitrary-precision bounds (rejection sampling).
  mpz_class below(const mpz_class& bound);
  /// Uniform in [1, bound).
  mpz_class nonzero_below(const mpz_class& bound);
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  /// Derives an independent child stream; used to give each trace/trial its
  /// own stream so results do not depend on scheduling.
  Rng fork(uint64_t stream_id) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// splitmix64 finalizer, used to derive stream seeds.
uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace noncelab

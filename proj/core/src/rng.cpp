#include "noncelab/rng.hpp"

#include <vector>

#include "noncelab/errors.hpp"

namespace noncelab {

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::from_entropy() {
  try {
    std::random_device rd;
    const uint64_t hi = rd();
    const uint64_t lo = rd();
    return Rng((hi << 32) ^ lo);
  } catch (const std::exception& e) {
    throw RngError(std::string("system entropy unavailable: ") + e.what());
  }
}

uint64_t Rng::below(uint64_t bound) {
  if (bound == 0) throw RngError("empty sampling range");
  if ((bound & (bound - 1)) == 0) return engine_() & (bound - 1);
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

mpz_class Rng::below(const mpz_class& bound) {
  if (bound <= 0) throw RngError("empty sampling range");
  const size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const size_t words = (bits + 63) / 64;
  const unsigned top_bits = static_cast<unsigned>(bits - (words - 1) * 64);
  const uint64_t top_mask = top_bits == 64 ? ~0ULL : ((1ULL << top_bits) - 1);
  std::vector<uint64_t> buf(words);
  mpz_class v;
  do {
    for (auto& w : buf) w = engine_();
    buf.back() &= top_mask;
    mpz_import(v.get_mpz_t(), words, -1, sizeof(uint64_t), 0, 0, buf.data());
  } while (v >= bound);
  return v;
}

mpz_class Rng::nonzero_below(const mpz_class& bound) {
  if (bound <= 1) throw RngError("empty sampling range");
  mpz_class v;
  do {
    v = below(bound);
  } while (v == 0);
  return v;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() { return gauss_(engine_); }

Rng Rng::fork(uint64_t stream_id) const { return Rng(mix_seed(seed_, stream_id)); }

}  // namespace noncelab

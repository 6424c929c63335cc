#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace noncelab {

class FieldElement;

/// Prime field GF(p). Elements keep a pointer to their field, so a
/// PrimeField must outlive every element created from it (CurveParams
/// holds its field through a shared_ptr for this reason).
class PrimeField {
 public:
  explicit PrimeField(mpz_class p);

  const mpz_class& modulus() const { return p_; }
  size_t bit_length() const { return bits_; }

  FieldElement element(const mpz_class& v) const;
  FieldElement zero() const;
  FieldElement one() const;

 private:
  mpz_class p_;
  size_t bits_;
};

enum class FieldOp { Add, Sub, Mul, Square, Inv, Shl };

class FieldElement {
 public:
  FieldElement() = default;

  const mpz_class& value() const { return v_; }
  const PrimeField* field() const { return f_; }
  bool is_zero() const { return v_ == 0; }

  /// Low 64 bits of the canonical representative.
  uint64_t low_word() const;

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b);
  friend FieldElement operator-(const FieldElement& a, const FieldElement& b);
  friend FieldElement operator*(const FieldElement& a, const FieldElement& b);
  FieldElement operator-() const;
  friend bool operator==(const FieldElement& a, const FieldElement& b);

  FieldElement square() const;
  /// Throws NonInvertible on zero.
  FieldElement inverse() const;
  /// Multiplication by 2^bits.
  FieldElement shl(unsigned bits) const;
  FieldElement pow(const mpz_class& e) const;
  bool is_square() const;

  std::string to_hex() const;

 private:
  friend class PrimeField;
  FieldElement(mpz_class v, const PrimeField* f) : v_(std::move(v)), f_(f) {}
  void check_same(const FieldElement& o) const;

  mpz_class v_;
  const PrimeField* f_ = nullptr;
};

/// Generic dispatcher over the elementary field operations. Shl takes its
/// shift count from the low word of the second operand.
FieldElement field_op(FieldOp kind, std::span<const FieldElement> operands);

/// Splits a non-negative integer into little-endian 64-bit words, padded
/// (or truncated) to `count` words.
std::vector<uint64_t> to_words(const mpz_class& v, size_t count);
mpz_class from_words(std::span<const uint64_t> words);

/// a^-1 mod m. Throws NonInvertible when gcd(a, m) != 1.
mpz_class mod_inverse(const mpz_class& a, const mpz_class& m);
/// Non-negative residue of a mod m.
mpz_class mod(const mpz_class& a, const mpz_class& m);

mpz_class parse_hex(const std::string& text);
std::string to_hex(const mpz_class& v);

}  // namespace noncelab

#include "noncelab/field.hpp"

#include <algorithm>
#include <cctype>

#include "noncelab/errors.hpp"

namespace noncelab {

PrimeField::PrimeField(mpz_class p) : p_(std::move(p)) {
  if (p_ < 2) throw DomainError("field modulus must be at least 2");
  bits_ = mpz_sizeinbase(p_.get_mpz_t(), 2);
}

FieldElement PrimeField::element(const mpz_class& v) const {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t());
  return FieldElement(std::move(r), this);
}

FieldElement PrimeField::zero() const { return FieldElement(0, this); }
FieldElement PrimeField::one() const { return FieldElement(1, this); }

void FieldElement::check_same(const FieldElement& o) const {
  if (f_ == nullptr || o.f_ == nullptr) throw DomainError("uninitialised field element");
  if (f_ != o.f_ && f_->modulus() != o.f_->modulus())
    throw DomainError("field element modulus mismatch");
}

uint64_t FieldElement::low_word() const {
  static_assert(sizeof(mp_limb_t) == sizeof(uint64_t), "64-bit GMP limbs required");
  return static_cast<uint64_t>(mpz_getlimbn(v_.get_mpz_t(), 0));
}

FieldElement operator+(const FieldElement& a, const FieldElement& b) {
  a.check_same(b);
  mpz_class r = a.v_ + b.v_;
  if (r >= a.f_->modulus()) r -= a.f_->modulus();
  return FieldElement(std::move(r), a.f_);
}

FieldElement operator-(const FieldElement& a, const FieldElement& b) {
  a.check_same(b);
  mpz_class r = a.v_ - b.v_;
  if (r < 0) r += a.f_->modulus();
  return FieldElement(std::move(r), a.f_);
}

FieldElement operator*(const FieldElement& a, const FieldElement& b) {
  a.check_same(b);
  mpz_class r;
  mpz_mul(r.get_mpz_t(), a.v_.get_mpz_t(), b.v_.get_mpz_t());
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), a.f_->modulus().get_mpz_t());
  return FieldElement(std::move(r), a.f_);
}

FieldElement FieldElement::operator-() const {
  if (v_ == 0) return *this;
  return FieldElement(f_->modulus() - v_, f_);
}

bool operator==(const FieldElement& a, const FieldElement& b) {
  a.check_same(b);
  return a.v_ == b.v_;
}

FieldElement FieldElement::square() const { return *this * *this; }

FieldElement FieldElement::inverse() const {
  if (v_ == 0) throw NonInvertible("inverse of zero");
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), v_.get_mpz_t(), f_->modulus().get_mpz_t()) == 0)
    throw NonInvertible("element not invertible");
  return FieldElement(std::move(r), f_);
}

FieldElement FieldElement::shl(unsigned bits) const {
  mpz_class r;
  mpz_mul_2exp(r.get_mpz_t(), v_.get_mpz_t(), bits);
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), f_->modulus().get_mpz_t());
  return FieldElement(std::move(r), f_);
}

FieldElement FieldElement::pow(const mpz_class& e) const {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), v_.get_mpz_t(), e.get_mpz_t(), f_->modulus().get_mpz_t());
  return FieldElement(std::move(r), f_);
}

bool FieldElement::is_square() const {
  if (v_ == 0) return true;
  return mpz_legendre(v_.get_mpz_t(), f_->modulus().get_mpz_t()) == 1;
}

std::string FieldElement::to_hex() const { return noncelab::to_hex(v_); }

FieldElement field_op(FieldOp kind, std::span<const FieldElement> ops) {
  auto need = [&](size_t n) {
    if (ops.size() != n) throw DomainError("wrong operand count for field operation");
  };
  switch (kind) {
    case FieldOp::Add: need(2); return ops[0] + ops[1];
    case FieldOp::Sub: need(2); return ops[0] - ops[1];
    case FieldOp::Mul: need(2); return ops[0] * ops[1];
    case FieldOp::Square: need(1); return ops[0].square();
    case FieldOp::Inv: need(1); return ops[0].inverse();
    case FieldOp::Shl:
      need(2);
      return ops[0].shl(static_cast<unsigned>(ops[1].low_word()));
  }
  throw DomainError("unknown field operation");
}

std::vector<uint64_t> to_words(const mpz_class& v, size_t count) {
  if (v < 0) throw DomainError("negative value has no word representation");
  const size_t need = (mpz_sizeinbase(v.get_mpz_t(), 2) + 63) / 64;
  std::vector<uint64_t> out(std::max(need, count), 0);
  size_t written = 0;
  mpz_export(out.data(), &written, -1, sizeof(uint64_t), 0, 0, v.get_mpz_t());
  out.resize(count);
  return out;
}

mpz_class from_words(std::span<const uint64_t> words) {
  mpz_class v;
  if (!words.empty())
    mpz_import(v.get_mpz_t(), words.size(), -1, sizeof(uint64_t), 0, 0, words.data());
  return v;
}

mpz_class parse_hex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != ':') s.push_back(c);
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s = s.substr(2);
  if (s.empty()) throw FormatError("empty hex string");
  mpz_class v;
  if (v.set_str(s, 16) != 0) throw FormatError("invalid hex string: " + text);
  return v;
}

std::string to_hex(const mpz_class& v) { return v.get_str(16); }

mpz_class mod_inverse(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  const mpz_class x = mod(a, m);
  if (x == 0 || mpz_invert(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t()) == 0)
    throw NonInvertible("value not invertible modulo " + m.get_str(16));
  return r;
}

mpz_class mod(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

}  // namespace noncelab

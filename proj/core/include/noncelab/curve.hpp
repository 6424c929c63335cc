#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "noncelab/field.hpp"

namespace noncelab {

struct AffinePoint {
  mpz_class x;
  mpz_class y;
  bool infinity = false;

  static AffinePoint at_infinity() { return {0, 0, true}; }
  friend bool operator==(const AffinePoint& a, const AffinePoint& b) {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.x == b.x && a.y == b.y;
  }
};

/// Homogeneous projective point (X : Y : Z); Z == 0 encodes the neutral
/// element. Ladder states are x-only and carry an unused Y.
struct ProjectivePoint {
  FieldElement X;
  FieldElement Y;
  FieldElement Z;

  bool is_identity() const { return Z.is_zero(); }
};

/// Short Weierstrass curve y^2 = x^3 + ax + b over GF(p) with a generator of
/// prime order n.
class CurveParams {
 public:
  /// word_count == 0 selects ceil(bitlen(p) / 64). `flag_word` appends one
  /// extra word per coordinate, the bignum sign flag of some libraries.
  CurveParams(std::string name, const mpz_class& p, const mpz_class& a, const mpz_class& b,
              const mpz_class& gx, const mpz_class& gy, const mpz_class& n,
              size_t word_count = 0, bool flag_word = false);

  const std::string& name() const { return name_; }
  const PrimeField& field() const { return *field_; }
  const mpz_class& p() const { return field_->modulus(); }
  const FieldElement& a() const { return a_; }
  const FieldElement& b() const { return b_; }
  const AffinePoint& generator() const { return g_; }
  const mpz_class& order() const { return n_; }
  size_t order_bits() const { return n_bits_; }
  /// Machine words per coordinate, including the optional flag word.
  size_t word_count() const { return word_count_ + (flag_word_ ? 1 : 0); }
  size_t value_words() const { return word_count_; }
  bool flag_word() const { return flag_word_; }
  /// Copy of these parameters with the flag word toggled.
  CurveParams with_flag_word(bool on) const;

  FieldElement fe(const mpz_class& v) const { return field_->element(v); }

  ProjectivePoint identity() const;
  ProjectivePoint lift(const AffinePoint& P) const;
  AffinePoint to_affine(const ProjectivePoint& P) const;

  bool on_curve(const AffinePoint& P) const;
  bool on_curve(const ProjectivePoint& P) const;
  /// True when some point on the curve has this x-coordinate.
  bool has_x(const FieldElement& x) const;
  /// y^2 = x^3 + ax + b right-hand side.
  FieldElement rhs(const FieldElement& x) const;

 private:
  std::string name_;
  std::shared_ptr<const PrimeField> field_;
  FieldElement a_;
  FieldElement b_;
  AffinePoint g_;
  mpz_class n_;
  size_t n_bits_;
  size_t word_count_;
  bool flag_word_;
};

/// Built-in curves: "secp521r1", "secp128r1", "wei25519" (the 4-word
/// Edwards-width profile, alias "edwards-width") and "toy16".
const CurveParams& builtin_curve(std::string_view name);
std::vector<std::string> builtin_curve_names();

/// Loads curves from key=value text (name, p, a, b, gx, gy, n, word_count as
/// hex). Blank lines separate curves. Validates every curve invariant.
std::vector<CurveParams> parse_curves(std::string_view text);
std::vector<CurveParams> load_curves(const std::string& path);
/// Either a built-in name or "<path>[:name]" of a curve file.
CurveParams resolve_curve(const std::string& spec);
/// Checks discriminant, generator membership and n*G == O. Throws DomainError.
void validate_curve(const CurveParams& curve);

/// Secret scalar with a fixed processing width.
struct Scalar {
  mpz_class value;
  size_t bit_length = 0;

  /// Width = bit length of the curve order.
  static Scalar for_curve(const mpz_class& v, const CurveParams& curve);
  int bit(size_t i) const { return mpz_tstbit(value.get_mpz_t(), i); }
};

/// Complete projective addition (valid for all inputs including doubling
/// and the neutral element). Throws DomainError on off-curve input.
ProjectivePoint point_add(const ProjectivePoint& P, const ProjectivePoint& Q,
                          const CurveParams& curve);
/// Dedicated doubling formula, independent of point_add.
ProjectivePoint point_double(const ProjectivePoint& P, const CurveParams& curve);
bool same_point(const ProjectivePoint& P, const ProjectivePoint& Q, const CurveParams& curve);

/// Textbook affine arithmetic with inversions; the reference oracle.
AffinePoint affine_add(const AffinePoint& P, const AffinePoint& Q, const CurveParams& curve);
AffinePoint affine_double(const AffinePoint& P, const CurveParams& curve);
AffinePoint affine_negate(const AffinePoint& P, const CurveParams& curve);
/// Left-to-right affine double-and-add; accepts any non-negative k.
AffinePoint reference_multiply(const mpz_class& k, const AffinePoint& P, const CurveParams& curve);

}  // namespace noncelab

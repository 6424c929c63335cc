#include "noncelab/curve.hpp"

#include <map>

#include "noncelab/errors.hpp"
#include "traced_ops.hpp"

namespace noncelab {

CurveParams::CurveParams(std::string name, const mpz_class& p, const mpz_class& a,
                         const mpz_class& b, const mpz_class& gx, const mpz_class& gy,
                         const mpz_class& n, size_t word_count, bool flag_word)
    : name_(std::move(name)),
      field_(std::make_shared<const PrimeField>(p)),
      n_(n),
      flag_word_(flag_word) {
  a_ = field_->element(a);
  b_ = field_->element(b);
  g_ = AffinePoint{gx, gy, false};
  if (n_ < 2) throw DomainError("curve order must be at least 2");
  n_bits_ = mpz_sizeinbase(n_.get_mpz_t(), 2);
  const size_t natural = (field_->bit_length() + 63) / 64;
  word_count_ = word_count == 0 ? natural : word_count;
  if (word_count_ < natural)
    throw DomainError("word_count too small for the field size of " + name_);
}

CurveParams CurveParams::with_flag_word(bool on) const {
  CurveParams c = *this;
  c.flag_word_ = on;
  return c;
}

ProjectivePoint CurveParams::identity() const {
  return {field_->zero(), field_->one(), field_->zero()};
}

ProjectivePoint CurveParams::lift(const AffinePoint& P) const {
  if (P.infinity) return identity();
  return {fe(P.x), fe(P.y), field_->one()};
}

AffinePoint CurveParams::to_affine(const ProjectivePoint& P) const {
  if (P.is_identity()) return AffinePoint::at_infinity();
  const FieldElement zi = P.Z.inverse();
  return {(P.X * zi).value(), (P.Y * zi).value(), false};
}

FieldElement CurveParams::rhs(const FieldElement& x) const { return x.square() * x + a_ * x + b_; }

bool CurveParams::on_curve(const AffinePoint& P) const {
  if (P.infinity) return true;
  if (P.x < 0 || P.x >= p() || P.y < 0 || P.y >= p()) return false;
  return fe(P.y).square() == rhs(fe(P.x));
}

bool CurveParams::on_curve(const ProjectivePoint& P) const {
  if (P.X.field() == nullptr) return false;
  if (P.is_identity()) return P.X.is_zero() && !P.Y.is_zero();
  // Y^2 Z = X^3 + a X Z^2 + b Z^3
  const FieldElement z2 = P.Z.square();
  const FieldElement lhs = P.Y.square() * P.Z;
  const FieldElement r = P.X.square() * P.X + a_ * P.X * z2 + b_ * z2 * P.Z;
  return lhs == r;
}

bool CurveParams::has_x(const FieldElement& x) const { return rhs(x).is_square(); }

Scalar Scalar::for_curve(const mpz_class& v, const CurveParams& curve) {
  return Scalar{v, curve.order_bits()};
}

void validate_curve(const CurveParams& c) {
  if (mpz_probab_prime_p(c.p().get_mpz_t(), 30) == 0)
    throw DomainError(c.name() + ": modulus is not prime");
  const FieldElement disc = c.a().square() * c.a() * c.fe(4) + c.b().square() * c.fe(27);
  if (disc.is_zero()) throw DomainError(c.name() + ": singular curve (4a^3 + 27b^2 = 0)");
  if (!c.on_curve(c.generator())) throw DomainError(c.name() + ": generator not on curve");
  if (!reference_multiply(c.order(), c.generator(), c).infinity)
    throw DomainError(c.name() + ": n*G is not the neutral element");
}

namespace detail {

ProjectivePoint add_complete(const ProjectivePoint& P, const ProjectivePoint& Q,
                             const CurveParams& curve, TracedOps& ops) {
  const FieldElement& a = curve.a();
  const FieldElement b3 = curve.b() + curve.b() + curve.b();
  const FieldElement a2 = a.square();

  const FieldElement xx = ops.mul(P.X, Q.X);
  const FieldElement yy = ops.mul(P.Y, Q.Y);
  const FieldElement zz = ops.mul(P.Z, Q.Z);
  const FieldElement xy = ops.add(ops.mul(P.X, Q.Y), ops.mul(Q.X, P.Y));
  const FieldElement yz = ops.add(ops.mul(P.Y, Q.Z), ops.mul(Q.Y, P.Z));
  const FieldElement xz = ops.add(ops.mul(P.X, Q.Z), ops.mul(Q.X, P.Z));

  const FieldElement axz = ops.mul(a, xz);
  const FieldElement bzz = ops.mul(b3, zz);
  const FieldElement u = ops.sub(ops.sub(yy, axz), bzz);
  const FieldElement v = ops.add(ops.add(yy, axz), bzz);
  const FieldElement w =
      ops.sub(ops.add(ops.mul(a, xx), ops.mul(b3, xz)), ops.mul(a2, zz));
  const FieldElement t = ops.add(ops.add(ops.add(xx, xx), xx), ops.mul(a, zz));

  return {ops.sub(ops.mul(xy, u), ops.mul(yz, w)),
          ops.add(ops.mul(v, u), ops.mul(t, w)),
          ops.add(ops.mul(yz, v), ops.mul(xy, t))};
}

}  // namespace detail

namespace {

void require_on_curve(const ProjectivePoint& P, const CurveParams& curve) {
  if (!curve.on_curve(P)) throw DomainError("point is not on " + curve.name());
}

}  // namespace

ProjectivePoint point_add(const ProjectivePoint& P, const ProjectivePoint& Q,
                          const CurveParams& curve) {
  require_on_curve(P, curve);
  require_on_curve(Q, curve);
  detail::TracedOps ops(nullptr);
  return detail::add_complete(P, Q, curve, ops);
}

ProjectivePoint point_double(const ProjectivePoint& P, const CurveParams& curve) {
  require_on_curve(P, curve);
  if (P.is_identity() || P.Y.is_zero()) return curve.identity();
  const FieldElement w = curve.a() * P.Z.square() + P.X.square() * curve.fe(3);
  const FieldElement s = P.Y * P.Z;
  const FieldElement B = P.X * P.Y * s;
  const FieldElement h = w.square() - B.shl(3);
  const FieldElement s2 = s.square();
  return {(h * s).shl(1), w * (B.shl(2) - h) - (P.Y.square() * s2).shl(3), (s2 * s).shl(3)};
}

bool same_point(const ProjectivePoint& P, const ProjectivePoint& Q, const CurveParams&) {
  if (P.is_identity() || Q.is_identity()) return P.is_identity() && Q.is_identity();
  return P.X * Q.Z == Q.X * P.Z && P.Y * Q.Z == Q.Y * P.Z;
}

AffinePoint affine_negate(const AffinePoint& P, const CurveParams& curve) {
  if (P.infinity) return P;
  return {P.x, (-curve.fe(P.y)).value(), false};
}

AffinePoint affine_double(const AffinePoint& P, const CurveParams& curve) {
  if (P.infinity || P.y == 0) return AffinePoint::at_infinity();
  const FieldElement x = curve.fe(P.x), y = curve.fe(P.y);
  const FieldElement lambda = (x.square() * curve.fe(3) + curve.a()) * (y + y).inverse();
  const FieldElement x3 = lambda.square() - x - x;
  const FieldElement y3 = lambda * (x - x3) - y;
  return {x3.value(), y3.value(), false};
}

AffinePoint affine_add(const AffinePoint& P, const AffinePoint& Q, const CurveParams& curve) {
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  if (P.x == Q.x) {
    if (P.y == Q.y) return affine_double(P, curve);
    return AffinePoint::at_infinity();
  }
  const FieldElement x1 = curve.fe(P.x), y1 = curve.fe(P.y);
  const FieldElement x2 = curve.fe(Q.x), y2 = curve.fe(Q.y);
  const FieldElement lambda = (y2 - y1) * (x2 - x1).inverse();
  const FieldElement x3 = lambda.square() - x1 - x2;
  const FieldElement y3 = lambda * (x1 - x3) - y1;
  return {x3.value(), y3.value(), false};
}

AffinePoint reference_multiply(const mpz_class& k, const AffinePoint& P, const CurveParams& curve) {
  if (k < 0) throw DomainError("negative scalar");
  AffinePoint R = AffinePoint::at_infinity();
  const size_t bits = k == 0 ? 0 : mpz_sizeinbase(k.get_mpz_t(), 2);
  for (size_t i = bits; i-- > 0;) {
    R = affine_double(R, curve);
    if (mpz_tstbit(k.get_mpz_t(), i)) R = affine_add(R, P, curve);
  }
  return R;
}

// ---------------------------------------------------------------------------
// Built-in curves

namespace {

struct BuiltinSpec {
  const char* name;
  const char* p;
  const char* a;
  const char* b;
  const char* gx;
  const char* gy;
  const char* n;
  size_t word_count;
};

constexpr BuiltinSpec kBuiltins[] = {
    {"secp521r1",
     "01ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"
     "ffffffffffffffffffffffffffffffffffffffffffff",
     "01ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff"
     "fffffffffffffffffffffffffffffffffffffffffffc",
     "0051953eb9618e1c9a1f929a21a0b68540eea2da725b99b315f3b8b489918ef109e156193951ec7e937b1652"
     "c0bd3bb1bf073573df883d2c34f1ef451fd46b503f00",
     "00c6858e06b70404e9cd9e3ecb662395b4429c648139053fb521f828af606b4d3dbaa14b5e77efe75928fe1d"
     "c127a2ffa8de3348b3c1856a429bf97e7e31c2e5bd66",
     "011839296a789a3bc0045c8a5fb42c7d1bd998f54449579b446817afbd17273e662c97ee72995ef42640c550"
     "b9013fad0761353c7086a272c24088be94769fd16650",
     "01fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffa51868783bf2f966b7fcc"
     "0148f709a5d03bb5c9b8899c47aebb6fb71e91386409",
     9},
    {"secp128r1", "fffffffdffffffffffffffffffffffff", "fffffffdfffffffffffffffffffffffc",
     "e87579c11079f43dd824993c2cee5ed3", "161ff7528b899b2d0c28607ca52c5b86",
     "cf5ac8395bafeb13c02da292dded7a83", "fffffffe0000000075a30d1b9038a115", 2},
    // Weierstrass model of Curve25519; only its 4-word coordinate width matters here.
    {"wei25519", "7fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffed",
     "2aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa984914a144",
     "7b425ed097b425ed097b425ed097b425ed097b425ed097b4260b5e9c7710c864",
     "2aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaad245a",
     "20ae19a1b8a086b4e01edd2c7748d14c923d4d7e6d7c61b229e9c5a27eced3d9",
     "1000000000000000000000000000000014def9dea2f79cd65812631a5cf5d3ed", 4},
    {"toy16", "fff1", "2", "d", "2", "5", "fe93", 1},
};

const std::map<std::string, CurveParams, std::less<>>& registry() {
  static const auto* reg = [] {
    auto* m = new std::map<std::string, CurveParams, std::less<>>();
    for (const auto& s : kBuiltins) {
      m->emplace(s.name, CurveParams(s.name, parse_hex(s.p), parse_hex(s.a), parse_hex(s.b),
                                     parse_hex(s.gx), parse_hex(s.gy), parse_hex(s.n),
                                     s.word_count));
    }
    return m;
  }();
  return *reg;
}

}  // namespace

const CurveParams& builtin_curve(std::string_view name) {
  if (name == "edwards-width") name = "wei25519";
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown curve: " + std::string(name));
  return it->second;
}

std::vector<std::string> builtin_curve_names() {
  std::vector<std::string> out;
  for (const auto& s : kBuiltins) out.emplace_back(s.name);
  return out;
}

}  // namespace noncelab

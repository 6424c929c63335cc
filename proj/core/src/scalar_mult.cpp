#include "noncelab/scalar_mult.hpp"

#include <optional>
#include <string>

#include "noncelab/errors.hpp"
#include "traced_ops.hpp"

namespace noncelab {

std::string_view to_string(Multiplier m) {
  return m == Multiplier::Ladder ? "ladder" : "daa";
}

Multiplier parse_multiplier(std::string_view text) {
  if (text == "ladder") return Multiplier::Ladder;
  if (text == "daa") return Multiplier::DoubleAndAlwaysAdd;
  throw ConfigError("unknown multiplier: " + std::string(text));
}

namespace {

// Izu-Takagi x-only formulas in the operation order of OpenSSL's ladder step.
// Odd lines hold the multiplications, even lines the cheap operations.
std::pair<ProjectivePoint, ProjectivePoint> step(const ProjectivePoint& s, const ProjectivePoint& r,
                                                 const FieldElement& x, const CurveParams& curve,
                                                 EventRecorder* rec) {
  detail::TracedOps op(rec);
  const FieldElement& a = curve.a();
  const FieldElement &X1 = s.X, &Z1 = s.Z, &X2 = r.X, &Z2 = r.Z;
  FieldElement t0, t1, t2, t3, t4, t5, t6;
  ProjectivePoint s2 = s, r2 = r;
  if (rec) rec->begin_step();

  t6 = op.mul(X2, X1);
  t0 = op.mul(Z2, Z1);
  t4 = op.mul(X2, Z1);
  t3 = op.mul(Z2, X1);
  t5 = op.mul(a, t0);

  t5 = op.add(t6, t5);
  t6 = op.add(t3, t4);

  t5 = op.mul(t6, t5);
  t0 = op.sqr(t0);

  t2 = op.shl(curve.b(), 2);

  t0 = op.mul(t2, t0);

  t5 = op.shl(t5, 1);
  t3 = op.sub(t4, t3);

  s2.Z = op.sqr(t3);
  t4 = op.mul(s2.Z, x);

  t0 = op.add(t0, t5);
  s2.X = op.sub(t0, t4);

  t4 = op.sqr(X2);
  t5 = op.sqr(Z2);
  t6 = op.mul(a, t5);

  t1 = op.add(X2, Z2);

  t1 = op.sqr(t1);

  t1 = op.sub(t1, t4);
  t1 = op.sub(t1, t5);
  t3 = op.sub(t4, t6);

  t3 = op.sqr(t3);
  t0 = op.mul(t5, t1);
  t0 = op.mul(t2, t0);

  r2.X = op.sub(t3, t0);
  t3 = op.add(t4, t6);

  t4 = op.sqr(t5);
  t4 = op.mul(t4, t2);
  t1 = op.mul(t1, t3);

  t1 = op.shl(t1, 1);
  r2.Z = op.add(t4, t1);

  if (rec) rec->end_step();
  return {s2, r2};
}

bool valid_x_state(const ProjectivePoint& P, const CurveParams& curve) {
  if (P.X.field() != &curve.field() || P.Z.field() != &curve.field()) return false;
  if (P.is_identity()) return !P.X.is_zero();
  return curve.has_x(P.X * P.Z.inverse());
}

void check_range(const Scalar& k, const CurveParams& curve) {
  if (k.value < 1 || k.value >= curve.order())
    throw DomainError("scalar outside [1, n-1]");
}

void check_width(const Scalar& k) {
  if (k.value < 0) throw DomainError("negative scalar");
  if (k.bit_length == 0 || mpz_sizeinbase(k.value.get_mpz_t(), 2) > k.bit_length)
    throw DomainError("scalar wider than its processing width");
}

class RngSource {
 public:
  explicit RngSource(const MultOptions& opt) : ptr_(opt.rng) {
    if (ptr_ == nullptr && opt.swap.needs_randomness()) {
      own_.emplace(opt.swap.rng_seed ? Rng(*opt.swap.rng_seed) : Rng::from_entropy());
      ptr_ = &*own_;
    }
  }
  Rng* get() const { return ptr_; }

 private:
  std::optional<Rng> own_;
  Rng* ptr_;
};

// y0 = (2b + (a + x x0)(x + x0) - x1 (x - x0)^2) / 2y for Q0 = kP, Q1 = Q0 + P.
AffinePoint recover_y(const ProjectivePoint& R0, const ProjectivePoint& R1, const AffinePoint& P,
                      const CurveParams& curve) {
  if (R0.is_identity()) return AffinePoint::at_infinity();
  if (R1.is_identity()) return affine_negate(P, curve);
  const FieldElement x = curve.fe(P.x), y = curve.fe(P.y);
  const FieldElement x0 = R0.X * R0.Z.inverse();
  const FieldElement x1 = R1.X * R1.Z.inverse();
  const FieldElement d = x - x0;
  const FieldElement num = curve.b() + curve.b() + (curve.a() + x * x0) * (x + x0) - x1 * d.square();
  const FieldElement y0 = num * (y + y).inverse();
  return {x0.value(), y0.value(), false};
}

AffinePoint ladder(const Scalar& k, const AffinePoint& base, const CurveParams& curve,
                   const MultOptions& opt) {
  if (base.infinity || !curve.on_curve(base)) throw DomainError("ladder base must be a finite curve point");
  RngSource src(opt);
  Rng* rng = src.get();
  const FieldElement x = curve.fe(base.x);

  // (s, r) = (R1, R0) = (P, O)
  ProjectivePoint s, r;
  if (opt.rng) {
    const FieldElement l0 = curve.fe(opt.rng->nonzero_below(curve.p()));
    const FieldElement l1 = curve.fe(opt.rng->nonzero_below(curve.p()));
    s = {x * l0, curve.fe(opt.rng->below(curve.p())), l0};
    r = {l1, curve.fe(opt.rng->below(curve.p())), curve.field().zero()};
  } else {
    // x-only neutral element needs X != 0
    s = curve.lift(base);
    r = {curve.field().one(), curve.field().one(), curve.field().zero()};
  }

  int prev = 0;
  for (size_t i = k.bit_length; i-- > 0;) {
    const int bit = k.bit(i);
    swap_points(opt.swap, s, r, static_cast<unsigned>(bit ^ prev), curve, opt.recorder, rng);
    std::tie(s, r) = step(s, r, x, curve, opt.recorder);
    prev = bit;
  }
  swap_points(opt.swap, s, r, static_cast<unsigned>(prev), curve, nullptr, rng);
  return recover_y(r, s, base, curve);
}

AffinePoint daa(const Scalar& k, const ProjectivePoint& P, const CurveParams& curve,
                const MultOptions& opt) {
  if (!curve.on_curve(P)) throw DomainError("point is not on " + curve.name());
  RngSource src(opt);
  Rng* rng = src.get();
  detail::TracedOps op(opt.recorder);
  ProjectivePoint R = curve.identity();
  ProjectivePoint T;
  for (size_t i = k.bit_length; i-- > 0;) {
    if (opt.recorder) opt.recorder->begin_step();
    R = detail::add_complete(R, R, curve, op);
    T = detail::add_complete(R, P, curve, op);
    if (opt.recorder) opt.recorder->end_step();
    swap_points(opt.swap, R, T, static_cast<unsigned>(k.bit(i)), curve, opt.recorder, rng);
  }
  return curve.to_affine(R);
}

}  // namespace

std::pair<ProjectivePoint, ProjectivePoint> ladder_step(const ProjectivePoint& s,
                                                        const ProjectivePoint& r,
                                                        const AffinePoint& base,
                                                        const CurveParams& curve,
                                                        EventRecorder* rec) {
  if (base.infinity || !curve.on_curve(base)) throw DomainError("ladder base must be a finite curve point");
  if (!valid_x_state(s, curve) || !valid_x_state(r, curve))
    throw DomainError("inconsistent ladder state");
  if (s.is_identity() && r.is_identity()) throw DomainError("inconsistent ladder state");
  return step(s, r, curve.fe(base.x), curve, rec);
}

AffinePoint montgomery_ladder(const Scalar& k, const AffinePoint& base, const CurveParams& curve,
                              const MultOptions& opt) {
  check_range(k, curve);
  check_width(k);
  return ladder(k, base, curve, opt);
}

AffinePoint double_and_always_add(const Scalar& k, const ProjectivePoint& P,
                                  const CurveParams& curve, const MultOptions& opt) {
  check_range(k, curve);
  check_width(k);
  return daa(k, P, curve, opt);
}

AffinePoint scalar_multiply(Multiplier m, const Scalar& k, const AffinePoint& base,
                            const CurveParams& curve, const MultOptions& opt) {
  return m == Multiplier::Ladder ? montgomery_ladder(k, base, curve, opt)
                                 : double_and_always_add(k, curve.lift(base), curve, opt);
}

std::vector<int> swap_conditions(Multiplier m, const Scalar& k) {
  std::vector<int> out;
  out.reserve(k.bit_length);
  int prev = 0;
  for (size_t i = k.bit_length; i-- > 0;) {
    const int bit = k.bit(i);
    out.push_back(m == Multiplier::Ladder ? bit ^ prev : bit);
    prev = bit;
  }
  return out;
}

namespace detail {

AffinePoint scalar_multiply_unchecked(Multiplier m, const Scalar& k, const AffinePoint& base,
                                      const CurveParams& curve, const MultOptions& opt) {
  check_width(k);
  if (m == Multiplier::Ladder) {
    if (k.value == 0) throw DomainError("ladder needs a non-zero scalar");
    return ladder(k, base, curve, opt);
  }
  return daa(k, curve.lift(base), curve, opt);
}

}  // namespace detail

}  // namespace noncelab

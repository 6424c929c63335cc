#include <gtest/gtest.h>

#include <sstream>

#include "noncelab/curve.hpp"
#include "noncelab/errors.hpp"
#include "noncelab/field.hpp"
#include "noncelab/rng.hpp"

using namespace noncelab;

TEST(Field, SmallArithmetic) {
  PrimeField f7(7);
  EXPECT_EQ((f7.element(3) * f7.element(5)).value(), 1);
  EXPECT_EQ(f7.element(1).inverse().value(), 1);
  EXPECT_EQ((f7.element(2) - f7.element(5)).value(), 4);
  EXPECT_EQ(f7.element(-1).value(), 6);
  EXPECT_THROW(f7.zero().inverse(), NonInvertible);
}

TEST(Field, SquareMatchesMul) {
  const auto& c = builtin_curve("secp521r1");
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const FieldElement x = c.fe(rng.below(c.p()));
    EXPECT_EQ(x.square(), x * x);
    if (!x.is_zero()) EXPECT_EQ((x * x.inverse()).value(), 1);
  }
}

TEST(Field, ValuesStayReduced) {
  const auto& c = builtin_curve("secp128r1");
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const FieldElement a = c.fe(rng.below(c.p())), b = c.fe(rng.below(c.p()));
    for (const FieldElement& v : {a + b, a - b, a * b, a.shl(7), -a}) {
      EXPECT_GE(v.value(), 0);
      EXPECT_LT(v.value(), c.p());
    }
  }
}

TEST(Field, WordsRoundTrip) {
  const mpz_class v = parse_hex("1ffffffffffffffff0000000000000001");
  const auto w = to_words(v, 3);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], 1u);
  EXPECT_EQ(from_words(w), v);
  EXPECT_EQ(to_hex(parse_hex("00ABcd")), "abcd");
}

TEST(Curve, BuiltinsAreValid) {
  for (const auto& name : builtin_curve_names()) {
    SCOPED_TRACE(name);
    const auto& c = builtin_curve(name);
    EXPECT_NO_THROW(validate_curve(c));
    EXPECT_TRUE(c.on_curve(c.generator()));
  }
  EXPECT_EQ(builtin_curve("secp521r1").word_count(), 9u);
  EXPECT_EQ(builtin_curve("secp128r1").word_count(), 2u);
  EXPECT_EQ(builtin_curve("wei25519").word_count(), 4u);
  EXPECT_EQ(builtin_curve("secp521r1").with_flag_word(true).word_count(), 10u);
  EXPECT_EQ(builtin_curve("secp521r1").order_bits(), 521u);
}

TEST(Curve, GroupLaw) {
  for (const char* name : {"toy16", "secp128r1", "secp521r1"}) {
    SCOPED_TRACE(name);
    const auto& c = builtin_curve(name);
    const ProjectivePoint G = c.lift(c.generator());
    EXPECT_TRUE(same_point(point_add(G, c.identity(), c), G, c));
    EXPECT_TRUE(same_point(point_add(G, G, c), point_double(G, c), c));
    EXPECT_TRUE(point_double(c.identity(), c).is_identity());
    const AffinePoint twoG = c.to_affine(point_double(G, c));
    EXPECT_TRUE(c.on_curve(twoG));
    EXPECT_EQ(twoG, affine_double(c.generator(), c));
    const AffinePoint nm1 = reference_multiply(c.order() - 1, c.generator(), c);
    EXPECT_TRUE(affine_add(nm1, c.generator(), c).infinity);
    EXPECT_EQ(nm1, affine_negate(c.generator(), c));
  }
}

TEST(Curve, ParseCurveText) {
  const std::string text =
      "name = mini\np = fff1\na = 2\nb = d\ngx = 2\ngy = 5\nn = fe93\n";
  const auto curves = parse_curves(text);
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].name(), "mini");
  EXPECT_EQ(curves[0].order(), builtin_curve("toy16").order());
}

TEST(Curve, ParseRejectsBadCurves) {
  // generator off the curve
  EXPECT_THROW(parse_curves("name = bad\np = fff1\na = 2\nb = d\ngx = 2\ngy = 6\nn = fe93\n"), DomainError);
  EXPECT_THROW(parse_curves("name = bad\np = fff1\na = 2\n"), Error);
  EXPECT_THROW(builtin_curve("nope"), ConfigError);
}

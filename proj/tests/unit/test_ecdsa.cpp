#include <gtest/gtest.h>

#include <sstream>

#include "noncelab/ecdsa.hpp"
#include "noncelab/errors.hpp"

using namespace noncelab;

TEST(Ecdsa, ForcedKeyOne) {
  const auto& c = builtin_curve("secp128r1");
  EXPECT_EQ(keypair_from_private(1, c).Q, c.generator());
  EXPECT_THROW(keypair_from_private(c.order(), c), DomainError);
  EXPECT_THROW(keypair_from_private(0, c), DomainError);
}

TEST(Ecdsa, SignatureAlgebra) {
  const auto& c = builtin_curve("secp128r1");
  Rng rng(3);
  const KeyPair key = keygen(c, rng);
  SignOptions so;
  so.lab_mode = true;
  for (int i = 0; i < 100; ++i) {
    const mpz_class z = rng.below(c.order());
    const SignResult r = sign(z, key, c, rng, so);
    ASSERT_TRUE(r.nonce);
    const mpz_class& k = r.nonce->k.value;
    EXPECT_EQ(mod(r.signature.s * k, c.order()), mod(z + r.signature.r * key.d.value, c.order()));
    EXPECT_EQ(r.signature.r, mod(reference_multiply(k, c.generator(), c).x, c.order()));
    EXPECT_TRUE(verify(r.signature, key.Q, c));
    EXPECT_EQ(recover_private_key(r.nonce->k, r.signature, c).value, key.d.value);
  }
}

TEST(Ecdsa, RoundTripAllMultipliersAndVariants) {
  const auto& c = builtin_curve("wei25519");
  Rng rng(5);
  for (Multiplier m : {Multiplier::Ladder, Multiplier::DoubleAndAlwaysAdd})
    for (SwapKind kind : {SwapKind::Plain, SwapKind::Libgcrypt, SwapKind::Masked, SwapKind::Combined}) {
      const KeyPair key = keygen(c, rng);
      SignOptions so;
      so.multiplier = m;
      so.swap.kind = kind;
      so.lab_mode = true;
      const SignResult r = sign(12345, key, c, rng, so);
      EXPECT_TRUE(verify(r.signature, key.Q, c));
      EXPECT_EQ(recover_private_key(r.nonce->k, r.signature, c).value, key.d.value);
    }
}

TEST(Ecdsa, ForcedNonce) {
  const auto& c = builtin_curve("secp128r1");
  Rng rng(1);
  const KeyPair key = keygen(c, rng);
  SignOptions so;
  so.forced_nonce = mpz_class(777);
  const SignResult r = sign(99, key, c, rng, so);
  EXPECT_EQ(r.signature.r, mod(reference_multiply(777, c.generator(), c).x, c.order()));
  EXPECT_FALSE(r.nonce);
}

TEST(Ecdsa, RejectsTamperedSignatures) {
  const auto& c = builtin_curve("secp128r1");
  Rng rng(2);
  const KeyPair key = keygen(c, rng);
  const Signature sig = sign(42, key, c, rng).signature;
  Signature bad = sig;
  mpz_combit(bad.s.get_mpz_t(), 3);
  EXPECT_FALSE(verify(bad, key.Q, c));
  bad = sig;
  bad.r = 0;
  EXPECT_FALSE(verify(bad, key.Q, c));
  bad = sig;
  bad.z += 1;
  EXPECT_FALSE(verify(bad, key.Q, c));
}

TEST(Ecdsa, WrongNonceGivesWrongKey) {
  const auto& c = builtin_curve("secp128r1");
  Rng rng(6);
  const KeyPair key = keygen(c, rng);
  SignOptions so;
  so.lab_mode = true;
  const SignResult r = sign(7, key, c, rng, so);
  const Scalar wrong = Scalar::for_curve(mod(r.nonce->k.value + 1, c.order()), c);
  const Scalar d = recover_private_key(wrong, r.signature, c);
  EXPECT_FALSE(reference_multiply(d.value, c.generator(), c) == key.Q);
}

TEST(Ecdsa, KeyAndSignatureText) {
  const auto& c = builtin_curve("secp128r1");
  Rng rng(9);
  const KeyPair key = keygen(c, rng);
  std::stringstream ks;
  write_key(ks, key);
  const KeyPair back = read_key(ks, c);
  EXPECT_EQ(back.d.value, key.d.value);
  EXPECT_EQ(back.Q, key.Q);
  std::stringstream ps;
  write_key(ps, key, false);
  EXPECT_EQ(read_key(ps, c).Q, key.Q);

  std::stringstream ss;
  const Signature sig = sign(5, key, c, rng).signature;
  write_signature(ss, sig);
  write_signature(ss, sig);
  const auto sigs = read_signatures(ss);
  ASSERT_EQ(sigs.size(), 2u);
  EXPECT_EQ(sigs[1].r, sig.r);
  EXPECT_EQ(sigs[1].s, sig.s);
  EXPECT_EQ(sigs[1].z, sig.z);
  std::stringstream junk("r=zz s=1 z=1\n");
  EXPECT_THROW(read_signatures(junk), Error);
}

#include "noncelab/ecdsa.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "noncelab/errors.hpp"

namespace noncelab {

KeyPair keypair_from_private(const mpz_class& d, const CurveParams& curve) {
  if (d < 1 || d >= curve.order()) throw DomainError("private key outside [1, n-1]");
  return {Scalar::for_curve(d, curve), reference_multiply(d, curve.generator(), curve)};
}

KeyPair keygen(const CurveParams& curve, Rng& rng) {
  return keypair_from_private(rng.nonzero_below(curve.order()), curve);
}

SignResult sign(const mpz_class& z, const KeyPair& key, const CurveParams& curve, Rng& rng,
                const SignOptions& opt) {
  const mpz_class& n = curve.order();
  if (key.d.value < 1 || key.d.value >= n) throw DomainError("private key outside [1, n-1]");
  for (;;) {
    const mpz_class k = opt.forced_nonce ? *opt.forced_nonce : rng.nonzero_below(n);
    const Scalar ks = Scalar::for_curve(k, curve);
    if (opt.recorder) opt.recorder->clear();
    MultOptions mo{opt.swap, opt.recorder, &rng};
    const AffinePoint R = scalar_multiply(opt.multiplier, ks, curve.generator(), curve, mo);
    const mpz_class r = R.infinity ? mpz_class(0) : mod(R.x, n);
    mpz_class s = 0;
    if (r != 0) s = mod(mod_inverse(k, n) * (z + r * key.d.value), n);
    if (r == 0 || s == 0) {
      if (opt.forced_nonce) throw DomainError("forced nonce gives a zero signature component");
      continue;
    }
    SignResult out{{r, s, z}, std::nullopt};
    if (opt.lab_mode) out.nonce = NonceRecord{ks, out.signature};
    return out;
  }
}

bool verify(const mpz_class& z, const Signature& sig, const AffinePoint& Q, const CurveParams& curve) {
  const mpz_class& n = curve.order();
  if (sig.r < 1 || sig.r >= n || sig.s < 1 || sig.s >= n) return false;
  if (Q.infinity || !curve.on_curve(Q)) return false;
  const mpz_class w = mod_inverse(sig.s, n);
  const mpz_class u1 = mod(z * w, n);
  const mpz_class u2 = mod(sig.r * w, n);
  const AffinePoint X = affine_add(reference_multiply(u1, curve.generator(), curve),
                                   reference_multiply(u2, Q, curve), curve);
  if (X.infinity) return false;
  return mod(X.x, n) == sig.r;
}

Scalar recover_private_key(const Scalar& k, const Signature& sig, const CurveParams& curve) {
  const mpz_class& n = curve.order();
  const mpz_class d = mod((sig.s * k.value - sig.z) * mod_inverse(sig.r, n), n);
  return Scalar::for_curve(d, curve);
}

namespace {

std::map<std::string, std::string> parse_fields(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw FormatError("expected key=value, got '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

}  // namespace

void write_key(std::ostream& out, const KeyPair& key, bool include_private) {
  if (include_private) out << "d=" << to_hex(key.d.value) << '\n';
  out << "qx=" << to_hex(key.Q.x) << '\n' << "qy=" << to_hex(key.Q.y) << '\n';
}

KeyPair read_key(std::istream& in, const CurveParams& curve) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (auto& [k, v] : parse_fields(line)) {
      if (k != "d" && k != "qx" && k != "qy") throw FormatError("unknown key field '" + k + "'");
      kv[k] = v;
    }
  }
  KeyPair key;
  if (kv.count("d")) {
    key = keypair_from_private(parse_hex(kv["d"]), curve);
    if (kv.count("qx") && (parse_hex(kv["qx"]) != key.Q.x || parse_hex(kv["qy"]) != key.Q.y))
      throw FormatError("public key does not match private key");
    return key;
  }
  if (!kv.count("qx") || !kv.count("qy")) throw FormatError("key file needs d or qx/qy");
  key.Q = {parse_hex(kv["qx"]), parse_hex(kv["qy"]), false};
  if (!curve.on_curve(key.Q)) throw FormatError("public key is not on " + curve.name());
  return key;
}

void write_signature(std::ostream& out, const Signature& sig) {
  out << "r=" << to_hex(sig.r) << " s=" << to_hex(sig.s) << " z=" << to_hex(sig.z) << '\n';
}

std::vector<Signature> read_signatures(std::istream& in) {
  std::vector<Signature> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto kv = parse_fields(line);
    if (!kv.count("r") || !kv.count("s") || !kv.count("z") || kv.size() != 3)
      throw FormatError("signature line needs exactly r=, s=, z=");
    out.push_back({parse_hex(kv["r"]), parse_hex(kv["s"]), parse_hex(kv["z"])});
  }
  return out;
}

}  // namespace noncelab

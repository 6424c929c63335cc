#include "noncelab/hnp.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "noncelab/errors.hpp"
#include "noncelab/field.hpp"

namespace noncelab {

namespace {

mpz_class pow2(size_t e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), 2, e);
  return v;
}

// d from the reduced rows: the embedding coordinate fixes the sign.
std::optional<mpz_class> scan_rows(const LatticeBasis& red, const HnpInstance& inst, const mpz_class& E,
                                   const CurveParams& curve, const AffinePoint& Q) {
  const size_t m = inst.samples.size();
  const auto& rec = inst.records.front();
  const mpz_class s_inv = mod_inverse(rec.signature.s, inst.n);
  const mpz_class mask = pow2(rec.leak_bits);
  for (const auto& row : red.rows) {
    const mpz_class& e = row[m + 1];
    if (abs(e) != E) continue;
    const mpz_class d = mod(e > 0 ? mpz_class(row[m]) : mpz_class(-row[m]), inst.n);
    if (d == 0) continue;
    // cheap filter on the first record's known bits before the point check
    const mpz_class k = mod(s_inv * (rec.signature.z + rec.signature.r * d), inst.n);
    if (mpz_class(k % mask) != rec.known_lsbs) continue;
    if (reference_multiply(d, curve.generator(), curve) == Q) return d;
  }
  return std::nullopt;
}

std::optional<mpz_class> solve(const HnpInstance& inst, const CurveParams& curve, const AffinePoint& Q,
                               unsigned weight, double& max_lll) {
  const LatticeBasis B = build_lattice(inst, weight);
  const auto t0 = std::chrono::steady_clock::now();
  const LllResult r = lll_reduce(B);
  max_lll = std::max(max_lll, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  mpz_class half = inst.n / 2;
  return scan_rows(r.basis, inst, half * weight, curve, Q);
}

}  // namespace

HnpInstance build_hnp(const std::vector<LeakRecord>& records, const CurveParams& curve) {
  if (records.empty()) throw DomainError("no leak records");
  HnpInstance inst;
  inst.n = curve.order();
  inst.records = records;
  for (const auto& r : records) {
    if (r.leak_bits < 1) throw DomainError("each record needs at least one known bit");
    if (r.leak_bits > curve.order_bits()) throw DomainError("more known bits than the order has");
    const mpz_class two_l = pow2(r.leak_bits);
    if (r.known_lsbs < 0 || r.known_lsbs >= two_l) throw DomainError("known bits exceed 2^l");
    if (r.signature.r <= 0 || r.signature.r >= inst.n || r.signature.s <= 0 || r.signature.s >= inst.n)
      throw DomainError("signature component out of range");
    const mpz_class s_inv = mod_inverse(r.signature.s, inst.n);
    const mpz_class inv2l = mod_inverse(two_l, inst.n);
    HnpSample h;
    h.t = mod(inv2l * s_inv * r.signature.r, inst.n);
    h.u = mod(inv2l * (s_inv * r.signature.z - r.known_lsbs), inst.n);
    h.leak_bits = r.leak_bits;
    inst.samples.push_back(std::move(h));
  }
  return inst;
}

LatticeBasis build_lattice(const HnpInstance& inst, unsigned weight) {
  if (inst.samples.empty()) throw DomainError("empty HNP instance");
  if (weight == 0) throw DomainError("embedding weight must be positive");
  const size_t m = inst.samples.size();
  const mpz_class& n = inst.n;
  const mpz_class E = mpz_class(n / 2) * weight;
  LatticeBasis B;
  B.rows.assign(m + 2, std::vector<mpz_class>(m + 2, 0));
  B.scale.resize(m + 2);
  for (size_t i = 0; i < m; ++i) {
    const auto& s = inst.samples[i];
    const mpz_class S = pow2(s.leak_bits + 1);
    const mpz_class c = n / S;
    B.scale[i] = S;
    B.rows[i][i] = S * n;
    B.rows[m][i] = S * s.t;
    B.rows[m + 1][i] = S * (s.u - c);
  }
  B.rows[m][m] = 1;
  B.rows[m + 1][m + 1] = E;
  B.scale[m] = 1;
  B.scale[m + 1] = E;
  return B;
}

KeyRecovery recover_key(const HnpInstance& inst, const CurveParams& curve, const AffinePoint& Q,
                        const RecoveryStrategy& strategy, unsigned weight) {
  if (inst.samples.empty() || inst.samples.size() != inst.records.size()) throw DomainError("malformed HNP instance");
  KeyRecovery out;
  out.attempts = 1;
  if (auto d = solve(inst, curve, Q, weight, out.max_lll_seconds)) {
    out.d = *d;
    return out;
  }
  if (strategy.kind == RecoveryStrategy::Kind::SubsetRetry) {
    Rng rng(strategy.seed);
    const size_t m = inst.records.size();
    for (size_t t = 0; t < strategy.max_tries; ++t) {
      std::vector<LeakRecord> pick;
      for (size_t i = 0; i < m; ++i)
        if (m == 1 || rng.bernoulli(0.5)) pick.push_back(inst.records[i]);
      if (pick.empty()) pick.push_back(inst.records[rng.below(m)]);
      // later tries cut the known bits at ever more confident positions
      const double tau = 0.5 + 0.5 * static_cast<double>(t + 1) / static_cast<double>(strategy.max_tries + 1);
      for (auto& r : pick) {
        if (r.confidence.size() < r.leak_bits) continue;
        size_t keep = 0;
        while (keep < r.leak_bits && r.confidence[keep] >= tau) ++keep;
        keep = std::max<size_t>(keep, 1);
        r.leak_bits = keep;
        r.known_lsbs %= pow2(keep);
        r.confidence.resize(keep);
      }
      ++out.attempts;
      if (auto d = solve(build_hnp(pick, curve), curve, Q, weight, out.max_lll_seconds)) {
        out.d = *d;
        return out;
      }
    }
  }
  throw RecoveryFailed("no lattice candidate matches the public key after " + std::to_string(out.attempts) +
                       " attempt(s)");
}

void write_leak_records(std::ostream& out, const std::vector<LeakRecord>& records) {
  for (const auto& r : records)
    out << "r=" << to_hex(r.signature.r) << " s=" << to_hex(r.signature.s) << " z=" << to_hex(r.signature.z)
        << " l=" << r.leak_bits << " a=" << to_hex(r.known_lsbs) << '\n';
}

std::vector<LeakRecord> read_leak_records(std::istream& in) {
  std::vector<LeakRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::map<std::string, std::string> kv;
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw FormatError("expected key=value: " + tok);
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    for (const char* k : {"r", "s", "z", "l", "a"})
      if (!kv.count(k)) throw FormatError(std::string("leak record misses ") + k + "=");
    if (kv.size() != 5) throw FormatError("unexpected field in leak record");
    LeakRecord r;
    r.signature = {parse_hex(kv["r"]), parse_hex(kv["s"]), parse_hex(kv["z"])};
    try {
      r.leak_bits = std::stoul(kv["l"]);
    } catch (const std::exception&) {
      throw FormatError("bad leak count: " + kv["l"]);
    }
    r.known_lsbs = parse_hex(kv["a"]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace noncelab

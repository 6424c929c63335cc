#pragma once

#include <optional>
#include <string>
#include <vector>

#include "noncelab/analysis.hpp"
#include "noncelab/dsp.hpp"
#include "noncelab/ecdsa.hpp"
#include "noncelab/hnp.hpp"
#include "noncelab/tracesim.hpp"

namespace noncelab {

// ---- Profiling and the end-to-end attack -------------------------------

struct ProfileConfig {
  ScalarTraceSpec spec;
  SimConfig sim;
  size_t traces = 8;  // full profiling multiplications, half per class
  size_t poi_count = 100;
  TemplateOptions templates;
  unsigned jobs = 1;
};

struct Profile {
  TemplateModel model;
  TTestResult t;  // over the profiling windows
  size_t windows = 0;
};

/// Simulates profiling multiplications, aligns them, picks points of
/// interest by t-test over the window features and fits the templates.
Profile build_profile(const ProfileConfig& cfg, Rng& rng);

AlignConfig align_config(const ScalarTraceSpec& spec, const SimConfig& sim);

struct AttackConfig {
  ScalarTraceSpec spec;
  SimConfig sim;
  size_t signatures = 1;
  /// Known low bits per nonce handed to the lattice when no nonce is
  /// recovered in full.
  size_t leak_bits = 300;
  size_t max_tries = 32;
  unsigned jobs = 1;
};

struct SignatureAttack {
  Signature signature;
  mpz_class true_nonce;
  NonceBits recovered;
  size_t correct_conditions = 0;
  size_t correct_bits = 0;
  bool nonce_verified = false;  // x(kG) mod n == r for the recovered k
  std::vector<int> true_conditions;
  std::vector<bool> interfered;  // per swap
};

struct AttackResult {
  KeyPair key;
  std::vector<SignatureAttack> signatures;
  std::optional<mpz_class> recovered_d;
  std::string method;  // "nonce", "lattice" or "failed"
  std::string failure;
};

/// Signs with lab-mode nonces, simulates each nonce multiplication,
/// aligns, classifies and recovers bits, then derives d from a verified
/// nonce or from the lattice over the known low bits.
AttackResult run_attack(const AttackConfig& cfg, const TemplateModel& model, Rng& rng);

/// Nonce bits of one simulated trace.
struct TraceAttack {
  AlignedSwapWindows windows;
  NonceBits bits;
};
TraceAttack attack_trace(const LeakageTrace& trace, const TemplateModel& model, const ScalarTraceSpec& spec,
                         const SimConfig& sim);

// ---- Lattice success-rate grid -----------------------------------------

struct ExperimentConfig {
  const CurveParams* curve = nullptr;
  size_t leak_bits = 300;
  size_t signatures = 2;
  double error_rate = 0;
  size_t trials = 100;
  uint64_t seed = 1;
  RecoveryStrategy::Kind strategy = RecoveryStrategy::Kind::Direct;
  size_t max_tries = 16;
  unsigned jobs = 1;

  /// Throws ConfigError on l > bitlen(n), l < 1, m < 1, trials < 1 or an
  /// error rate outside [0, 1].
  void validate() const;
};

struct ExperimentResult {
  ExperimentConfig cfg;
  size_t successes = 0;
  double success_rate = 0;
  double mean_seconds = 0;
  double max_lll_seconds = 0;
};

/// Per trial: fresh key and m lab-mode signatures, the l true low nonce
/// bits with each bit flipped with probability e, then recover_key. A
/// trial succeeds iff the recovered d satisfies d G == Q.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// leak_bits,signatures,error_rate,trials,successes,mean_seconds. Timing is
/// written as "NA" unless with_timing is set, which keeps the file
/// reproducible.
void write_experiment_csv(const std::string& path, const std::vector<ExperimentResult>& rows,
                          bool with_timing = false);

}  // namespace noncelab

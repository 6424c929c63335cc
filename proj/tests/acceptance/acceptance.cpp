// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance            run every criterion
//   acceptance 4 7        run the listed ones

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "noncelab/errors.hpp"
#include "noncelab/experiment.hpp"

#ifndef NONCELAB_CLI_PATH
#define NONCELAB_CLI_PATH ""
#endif

using namespace noncelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a sub-check; the criterion passes only if every sub-check does.
  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " [failed]");
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

mpz_class pow2(size_t e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), 2, e);
  return v;
}

std::vector<size_t> mul_groups(const EventRecorder& rec) {
  std::vector<size_t> groups;
  bool in = false;
  for (const auto& e : rec.events()) {
    if (is_mul_like(e.op)) {
      if (!in) groups.push_back(0);
      ++groups.back();
    }
    in = is_mul_like(e.op);
  }
  return groups;
}

const std::vector<size_t> kPattern{5, 2, 1, 2, 3, 1, 3, 3};

// ---- 1: multipliers and ECDSA ------------------------------------------

Outcome criterion1() {
  Outcome o;
  Stopwatch sw;
  Rng rng(101);
  for (const char* name : {"secp128r1", "secp521r1"}) {
    const auto& c = builtin_curve(name);
    size_t bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const mpz_class k = rng.nonzero_below(c.order());
      const Scalar s = Scalar::for_curve(k, c);
      const AffinePoint ref = reference_multiply(k, c.generator(), c);
      bad += !(montgomery_ladder(s, c.generator(), c) == ref) ||
             !(double_and_always_add(s, c.lift(c.generator()), c) == ref);
    }
    o.check(bad == 0, std::string(name) + " 1000 scalars mismatches=" + std::to_string(bad));
  }
  {
    // every scalar of the toy curve against running repeated addition
    const auto& c = builtin_curve("toy16");
    AffinePoint acc = AffinePoint::at_infinity();
    size_t bad = 0;
    for (mpz_class k = 1; k < c.order(); ++k) {
      acc = affine_add(acc, c.generator(), c);
      const Scalar s = Scalar::for_curve(k, c);
      bad += !(montgomery_ladder(s, c.generator(), c) == acc) ||
             !(double_and_always_add(s, c.lift(c.generator()), c) == acc);
    }
    bad += !affine_add(acc, c.generator(), c).infinity;
    o.check(bad == 0, "toy16 exhaustive " + c.order().get_str() + " scalars mismatches=" + std::to_string(bad));
  }
  for (const auto& name : builtin_curve_names()) {
    const auto& c = builtin_curve(name);
    size_t bad = 0;
    SignOptions so;
    so.lab_mode = true;
    for (int i = 0; i < 100; ++i) {
      const KeyPair key = keygen(c, rng);
      const SignResult r = sign(rng.below(pow2(c.order_bits())), key, c, rng, so);
      bad += !verify(r.signature, key.Q, c) || recover_private_key(r.nonce->k, r.signature, c).value != key.d.value;
    }
    o.check(bad == 0, name + " ECDSA roundtrips failed=" + std::to_string(bad) + "/100");
  }
  const double t = sw.seconds();
  o.check(t < 60, "runtime " + num(t, 3) + " s (< 60)");
  return o;
}

// ---- 2: swap semantics -------------------------------------------------

Outcome criterion2() {
  Outcome o;
  Rng rng(202);
  for (SwapKind kind : {SwapKind::Plain, SwapKind::Libgcrypt, SwapKind::Masked, SwapKind::Combined}) {
    size_t bad = 0, runs = 0;
    for (size_t words : {4u, 9u})
      for (int i = 0; i < 1000; ++i) {
        WordArrayPair p;
        for (size_t w = 0; w < words; ++w) p.a.push_back(rng.next_u64()), p.b.push_back(rng.next_u64());
        for (unsigned cond : {0u, 1u}) {
          const WordArrayPair out = ct_swap({kind, {}}, p, cond, nullptr, &rng);
          bad += !(out == (cond ? WordArrayPair{p.b, p.a} : p));
          ++runs;
        }
      }
    o.check(bad == 0, std::string(to_string(kind)) + " " + std::to_string(runs - bad) + "/" + std::to_string(runs));
  }
  return o;
}

// ---- 3: ladder step pattern ---------------------------------------------

Outcome criterion3() {
  Outcome o;
  Rng rng(303);
  for (const auto& name : builtin_curve_names()) {
    const auto& c = builtin_curve(name);
    size_t bad = 0;
    for (int i = 0; i < 200; ++i) {
      const mpz_class k = rng.nonzero_below(c.order() - 1);
      EventRecorder rec;
      ladder_step(c.lift(reference_multiply(k, c.generator(), c)), c.lift(reference_multiply(k + 1, c.generator(), c)),
                  c.generator(), c, &rec);
      bad += mul_groups(rec) != kPattern;
    }
    o.check(bad == 0, name + " recorder groups wrong in " + std::to_string(bad) + "/200 steps");
  }
  SimConfig sim;
  sim.noise_sigma = 0;
  const size_t spe = sim.samples_per_event;
  for (const char* name : {"secp128r1", "secp521r1"}) {
    const auto& c = builtin_curve(name);
    const LeakageTrace step = synthesize(reference_step(c, Multiplier::Ladder, rng), sim, rng);
    std::vector<size_t> sizes;
    for (const auto& g : peak_groups(activity_envelope(step.samples, step.sample_rate, sim.f_mod()), spe / 3,
                                     spe + spe / 8))
      sizes.push_back(g.size());
    o.check(sizes == kPattern, std::string(name) + " envelope groups " + std::to_string(sizes.size()));

    const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
    const LeakageTrace t = simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng);
    const AlignedSwapWindows w = align_swaps(t, align_config(spec, sim));
    o.check(w.first_step_pattern == kPattern && w.windows.size() == c.order_bits(),
            std::string(name) + " align_swaps pattern and " + std::to_string(w.windows.size()) + " windows");
  }
  return o;
}

// ---- 4: TVLA verdicts ---------------------------------------------------

Outcome criterion4() {
  Outcome o;
  Stopwatch sw;
  const auto& c = builtin_curve("secp521r1");
  const SimConfig sim;
  Rng rng(404);
  for (SwapKind kind : {SwapKind::Plain, SwapKind::Libgcrypt, SwapKind::Masked}) {
    const ScalarTraceSpec spec{&c, Multiplier::Ladder, {kind, {}}};
    const TTestResult t = welch_t(generate_swap_set(spec, 10000, sim, rng));
    o.check(t.leaks(), std::string(to_string(kind)) + " max|t|=" + num(t.max_abs_t));
  }
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {SwapKind::Combined, {}}};
  size_t quiet = 0;
  double worst = 0;
  for (int run = 0; run < 20; ++run) {
    const TTestResult t = welch_t(generate_swap_set(spec, 10000, sim, rng));
    quiet += !t.leaks();
    worst = std::max(worst, t.max_abs_t);
  }
  o.check(quiet >= 19, "combined below 4.5 in " + std::to_string(quiet) + "/20 runs (largest " + num(worst) + ")");
  const double secs = sw.seconds();
  o.check(secs < 300, "runtime " + num(secs, 3) + " s (< 300)");
  return o;
}

// ---- 5: classification properties ---------------------------------------

struct Windows {
  size_t total = 0, correct = 0;
  double conf_correct = 0, conf_wrong = 0;

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0; }
  void add(const BitPrediction& p, int truth) {
    ++total;
    if (p.cond_guess == truth) {
      ++correct;
      conf_correct += p.confidence();
    } else {
      conf_wrong += p.confidence();
    }
  }
};

const CurveParams& attack_curve() { return builtin_curve("secp521r1"); }

TemplateModel profile_at(const SimConfig& sim, uint64_t seed) {
  ProfileConfig pc;
  pc.spec = {&attack_curve(), Multiplier::Ladder, {}};
  pc.sim = sim;
  Rng rng(seed);
  return build_profile(pc, rng).model;
}

// Classifies every swap of `traces` fresh random-nonce traces. With
// only_interfered, counts only swaps covered by an interference burst.
Windows classify_traces(const TemplateModel& model, const SimConfig& sim, size_t traces, uint64_t seed,
                        bool only_interfered = false) {
  const auto& c = attack_curve();
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
  Rng rng(seed);
  Windows w;
  for (size_t i = 0; i < traces; ++i) {
    const LeakageTrace t = simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng);
    const TraceAttack a = attack_trace(t, model, spec, sim);
    const auto swaps = t.of_kind(MarkerKind::Swap);
    for (size_t j = 0; j < swaps.size(); ++j)
      if (!only_interfered || swaps[j].interfered) w.add(a.bits.conditions[j], swaps[j].cond);
  }
  return w;
}

Outcome criterion5() {
  Outcome o;
  const std::vector<double> sigmas{0, 1, 1.5, 2, 3};
  std::vector<Windows> sweep;
  for (size_t i = 0; i < sigmas.size(); ++i) {
    SimConfig sim;
    sim.noise_sigma = sigmas[i];
    const TemplateModel model = profile_at(sim, 500 + i);
    sweep.push_back(classify_traces(model, sim, 2, 550 + i));
  }
  o.check(sweep[0].accuracy() == 1.0 && sweep[0].total >= 1000,
          "noiseless " + std::to_string(sweep[0].correct) + "/" + std::to_string(sweep[0].total));
  std::string curve;
  bool mono = true;
  for (size_t i = 0; i < sweep.size(); ++i) {
    curve += (i ? " " : "") + num(sigmas[i], 2) + ":" + num(sweep[i].accuracy());
    if (i && sweep[i].accuracy() > sweep[i - 1].accuracy() + 0.02) mono = false;
  }
  o.check(mono, "sweep sigma:accuracy " + curve);

  {
    SimConfig sim;
    sim.noise_sigma = 1;
    const TemplateModel model = profile_at(sim, 560);
    sim.interference.push_back({0.3, 0.3, 20});
    const Windows in = classify_traces(model, sim, 4, 561, true);
    o.check(in.total >= 400 && in.accuracy() >= 0.4 && in.accuracy() <= 0.6,
            "inside interference " + num(in.accuracy()) + " over " + std::to_string(in.total) + " windows");
  }

  // the sweep point closest to 90 % accuracy
  size_t near90 = 1;
  for (size_t i = 1; i < sweep.size(); ++i)
    if (std::abs(sweep[i].accuracy() - 0.9) < std::abs(sweep[near90].accuracy() - 0.9)) near90 = i;
  const Windows& h = sweep[near90];
  const size_t wrong = h.total - h.correct;
  const double pc = h.correct ? h.conf_correct / static_cast<double>(h.correct) : 0;
  const double pw = wrong ? h.conf_wrong / static_cast<double>(wrong) : 1;
  o.check(wrong > 0 && pc > pw, "sigma " + num(sigmas[near90], 2) + " (accuracy " + num(h.accuracy()) +
                                    ") mean probability correct " + num(pc) + " vs incorrect " + num(pw));
  return o;
}

// ---- 6: end-to-end attack -----------------------------------------------

Outcome criterion6() {
  Outcome o;
  const auto& c = attack_curve();
  {
    SimConfig sim;
    sim.noise_sigma = 0;
    AttackConfig ac;
    ac.spec = {&c, Multiplier::Ladder, {}};
    ac.sim = sim;
    Rng rng(601);
    const AttackResult r = run_attack(ac, profile_at(sim, 600), rng);
    const auto& s = r.signatures.front();
    o.check(s.correct_bits == c.order_bits() && s.recovered.value() == s.true_nonce,
            "noiseless bits " + std::to_string(s.correct_bits) + "/" + std::to_string(c.order_bits()));
    o.check(r.method == "nonce" && r.recovered_d && *r.recovered_d == r.key.d.value,
            "private key via recovered nonce: " + std::string(r.recovered_d && *r.recovered_d == r.key.d.value
                                                                   ? "exact"
                                                                   : "wrong"));
  }
  {
    // a ladder bit is k_i = c_i xor k_{i+1}; one condition error flips the
    // whole tail, so "recovered bits" counts correctly classified swaps
    SimConfig sim;
    sim.noise_sigma = 1;
    const TemplateModel model = profile_at(sim, 610);
    const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
    Rng rng(611);
    size_t good = 0, correct = 0, total = 0;
    std::string per;
    for (int i = 0; i < 4; ++i) {
      const mpz_class k = rng.nonzero_below(c.order());
      const LeakageTrace t = simulate_scalar_mult(spec, k, c.generator(), sim, rng);
      const TraceAttack a = attack_trace(t, model, spec, sim);
      const auto truth = swap_conditions(Multiplier::Ladder, Scalar::for_curve(k, c));
      size_t ok = 0;
      for (size_t j = 0; j < truth.size(); ++j) ok += a.bits.conditions[j].cond_guess == truth[j];
      good += ok >= 495;
      correct += ok;
      total += truth.size();
      per += (i ? "," : "") + std::to_string(ok);
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(total);
    o.check(acc >= 0.97, "sigma 1 per-bit accuracy " + num(acc));
    o.check(good >= 3, "bits recovered per trace " + per + " (>= 495 on " + std::to_string(good) + "/4)");
  }
  return o;
}

// ---- 7: lattice recovery ------------------------------------------------

ExperimentResult experiment(size_t l, size_t m, double e, uint64_t seed,
                            RecoveryStrategy::Kind kind = RecoveryStrategy::Kind::Direct) {
  ExperimentConfig cfg;
  cfg.curve = &builtin_curve("secp521r1");
  cfg.leak_bits = l;
  cfg.signatures = m;
  cfg.error_rate = e;
  cfg.trials = 100;
  cfg.seed = seed;
  cfg.strategy = kind;
  return run_experiment(cfg);
}

Outcome criterion7() {
  Outcome o;
  Stopwatch sw;
  double max_lll = 0;
  const ExperimentResult a = experiment(300, 2, 0, 701);
  max_lll = std::max(max_lll, a.max_lll_seconds);
  o.check(a.success_rate == 1.0, "l=300 m=2 e=0 success " + num(a.success_rate));
  const ExperimentResult b = experiment(100, 7, 0, 702);
  max_lll = std::max(max_lll, b.max_lll_seconds);
  o.check(b.success_rate >= 0.95, "l=100 m=7 e=0 success " + num(b.success_rate));

  const std::vector<double> errors{0, 0.0005, 0.001, 0.002, 0.005};
  std::string curve;
  bool mono = true;
  double prev = 2;
  for (size_t i = 0; i < errors.size(); ++i) {
    const ExperimentResult r = experiment(300, 2, errors[i], 710 + i);
    max_lll = std::max(max_lll, r.max_lll_seconds);
    curve += (i ? " " : "") + num(errors[i]) + ":" + num(r.success_rate, 3);
    if (r.success_rate > prev + 0.05) mono = false;
    prev = r.success_rate;
  }
  o.check(mono, "l=300 m=2 e:success " + curve);

  const ExperimentResult mid = experiment(300, 2, 0.1, 720, RecoveryStrategy::Kind::SubsetRetry);
  max_lll = std::max(max_lll, mid.max_lll_seconds);
  o.detail << "; reported only: e=0.1 subset_retry success " << num(mid.success_rate, 3);

  o.check(max_lll < 1, "slowest LLL " + num(max_lll, 3) + " s (< 1)");
  const double secs = sw.seconds();
  o.check(secs < 600, "grid runtime " + num(secs, 3) + " s (< 600)");
  return o;
}

// ---- 8: CLI determinism -------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs the same command into two directories and compares every file.
bool same_outputs(const std::string& cli, const std::string& args, const fs::path& root, const std::string& tag,
                  std::string& why) {
  fs::path dirs[2] = {root / (tag + "_a"), root / (tag + "_b")};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + d.string() + "\" > \"" + d.string() +
                            ".log\" 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      why = tag + " exited non-zero";
      return false;
    }
  }
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    ++files;
    const fs::path other = dirs[1] / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      why = tag + " differs in " + e.path().filename().string();
      return false;
    }
  }
  why = tag + " " + std::to_string(files) + " files identical";
  return files > 0 && std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator()) ==
                          static_cast<long>(files);
}

Outcome criterion8() {
  Outcome o;
  const std::string cli = NONCELAB_CLI_PATH;
  if (cli.empty() || !fs::exists(cli)) {
    o.check(false, "CLI executable not built");
    return o;
  }
  const fs::path root = fs::temp_directory_path() / "noncelab_acceptance";
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"attack", "attack --seed 1 --set sim.noise_sigma=0"},
      {"simulate", "simulate --seed 3 --curve secp128r1 --set simulate.count=3"},
      {"training", "simulate --seed 3 --curve toy16 --set simulate.mode=training --set simulate.count=4"},
      {"assess", "assess --seed 4 --variant masked --set assess.traces_per_class=500"},
      {"train", "train --seed 5 --curve secp128r1 --set analysis.profile_traces=4"},
      {"experiment", "experiment --seed 6 --set experiment.trials=5 --set experiment.leak_bits=200,300 "
                     "--set experiment.error_rates=0,0.01"},
  };
  for (const auto& [tag, args] : runs) {
    std::string why;
    o.check(same_outputs(cli, args, root, tag, why), why);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> all = {
      {"multiplier and ECDSA oracles", criterion1},
      {"swap semantics", criterion2},
      {"ladder step pattern", criterion3},
      {"TVLA verdicts", criterion4},
      {"classification properties", criterion5},
      {"end-to-end attack", criterion6},
      {"lattice recovery", criterion7},
      {"CLI determinism", criterion8},
  };
  std::vector<size_t> pick;
  for (int i = 1; i < argc; ++i) {
    const long n = std::strtol(argv[i], nullptr, 10);
    if (n < 1 || n > static_cast<long>(all.size())) {
      std::cerr << "unknown criterion " << argv[i] << "\n";
      return 2;
    }
    pick.push_back(static_cast<size_t>(n));
  }
  if (pick.empty())
    for (size_t i = 1; i <= all.size(); ++i) pick.push_back(i);

  int failed = 0;
  for (size_t n : pick) {
    const auto& [title, fn] = all[n - 1];
    Stopwatch sw;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << title << " (" << num(sw.seconds(), 3)
              << " s): " << o.detail.str() << std::endl;
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}

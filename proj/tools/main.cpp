#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "noncelab/errors.hpp"
#include "noncelab/experiment.hpp"
#include "noncelab/field.hpp"
#include "run_config.hpp"

#ifndef NONCELAB_VERSION
#define NONCELAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace noncelab;
using noncelab::cli::RunConfig;

namespace {

struct Context {
  RunConfig cfg;
  std::string command;
  fs::path out;

  fs::path path(const std::string& name) const { return out / name; }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
}

std::string required(const RunConfig& cfg, const std::string& key) {
  const std::string& v = cfg.str(key);
  if (v.empty()) throw ConfigError("'" + key + "' must be set for this command");
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

mpz_class pow2(size_t e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), 2, e);
  return v;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

// ---- commands ------------------------------------------------------------

int cmd_keygen(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  Rng rng(ctx.cfg.u64("seed"));
  const KeyPair key = keygen(curve, rng);
  std::ostringstream priv, pub;
  write_key(priv, key, true);
  write_key(pub, key, false);
  write_text(ctx.path("key.txt"), priv.str());
  write_text(ctx.path("public.txt"), pub.str());
  std::cout << pub.str();
  return 0;
}

int cmd_sign(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  auto in = open_in(required(ctx.cfg, "key"));
  const KeyPair key = read_key(in, curve);
  if (key.d.bit_length == 0) throw ConfigError("signing needs a private key");
  Rng rng(ctx.cfg.u64("seed"));
  const ScalarTraceSpec spec = ctx.cfg.spec(curve);
  SignOptions so;
  so.multiplier = spec.multiplier;
  so.swap = spec.variant;
  so.lab_mode = ctx.cfg.flag("sign.lab_mode");
  std::ostringstream sigs, nonces;
  const size_t count = ctx.cfg.size("sign.count");
  for (size_t i = 0; i < count; ++i) {
    const mpz_class z =
        ctx.cfg.str("sign.digest").empty() ? rng.below(pow2(curve.order_bits())) : parse_hex(ctx.cfg.str("sign.digest"));
    const SignResult r = sign(z, key, curve, rng, so);
    write_signature(sigs, r.signature);
    if (r.nonce) nonces << "k=" << to_hex(r.nonce->k.value) << '\n';
  }
  write_text(ctx.path("signatures.txt"), sigs.str());
  if (so.lab_mode) write_text(ctx.path("nonces.txt"), nonces.str());
  std::cout << sigs.str();
  return 0;
}

int cmd_verify(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  auto kin = open_in(required(ctx.cfg, "key"));
  const KeyPair key = read_key(kin, curve);
  auto sin = open_in(required(ctx.cfg, "signatures"));
  const auto sigs = read_signatures(sin);
  std::ostringstream csv;
  csv << "index,valid\n";
  size_t bad = 0;
  for (size_t i = 0; i < sigs.size(); ++i) {
    const bool ok = verify(sigs[i], key.Q, curve);
    bad += !ok;
    csv << i << ',' << (ok ? 1 : 0) << '\n';
  }
  write_text(ctx.path("verify.csv"), csv.str());
  std::cout << "valid=" << sigs.size() - bad << " invalid=" << bad << '\n';
  return bad ? 2 : 0;
}

int cmd_simulate(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  const ScalarTraceSpec spec = ctx.cfg.spec(curve);
  const SimConfig sim = ctx.cfg.sim();
  Rng rng(ctx.cfg.u64("seed"));
  const std::string mode = ctx.cfg.str("simulate.mode");
  const size_t count = ctx.cfg.size("simulate.count");
  const auto jobs = static_cast<unsigned>(ctx.cfg.u64("jobs"));
  std::vector<LeakageTrace> traces;
  if (mode == "swap") {
    traces = generate_swap_set(spec, count, sim, rng, jobs).traces;
  } else if (mode == "training") {
    traces = generate_training_set(spec, count, sim, rng, jobs).traces;
  } else if (mode == "scalar") {
    std::ostringstream nonces;
    for (size_t i = 0; i < count; ++i) {
      const mpz_class k = rng.nonzero_below(curve.order());
      traces.push_back(simulate_scalar_mult(spec, k, curve.generator(), sim, rng));
      nonces << "k=" << to_hex(k) << '\n';
    }
    write_text(ctx.path("nonces.txt"), nonces.str());
  } else {
    throw ConfigError("simulate.mode must be swap, training or scalar");
  }
  write_traces(ctx.path("traces.sctr").string(), traces, {{"seed", ctx.cfg.str("seed")}, {"mode", mode}});
  write_labels_csv(ctx.path("labels.csv").string(), traces);
  write_markers_csv(ctx.path("markers.csv").string(), traces);
  std::cout << "traces=" << traces.size() << " samples=" << traces.front().samples.size() << '\n';
  return 0;
}

// Swap-set traces from files: one label per trace, taken from its swap marker.
TraceSet load_swap_set(const RunConfig& cfg) {
  TraceSet set;
  set.traces = read_traces(cfg.str("traces"));
  read_swap_markers(required(cfg, "markers"), required(cfg, "labels"), set.traces);
  for (const auto& t : set.traces) {
    const auto conds = t.swap_conditions();
    if (conds.size() != 1 || conds.front() < 0) throw FormatError("assess expects one labelled swap per trace");
    set.labels.push_back({conds.front()});
  }
  return set;
}

int cmd_assess(Context& ctx) {
  TraceSet set;
  if (!ctx.cfg.str("traces").empty()) {
    set = load_swap_set(ctx.cfg);
  } else {
    const CurveParams curve = ctx.cfg.curve();
    Rng rng(ctx.cfg.u64("seed"));
    set = generate_swap_set(ctx.cfg.spec(curve), ctx.cfg.size("assess.traces_per_class"), ctx.cfg.sim(), rng,
                            static_cast<unsigned>(ctx.cfg.u64("jobs")));
  }
  const TTestResult t = welch_t(set);
  write_tcurve_csv(ctx.path("tcurve.csv").string(), t);
  std::ostringstream s;
  s << "n0=" << t.n0 << "\nn1=" << t.n1 << "\nmax_abs_t=" << fmt(t.max_abs_t) << "\nthreshold=" << kTvlaThreshold
    << "\nverdict=" << (t.leaks() ? "leak" : "no-leak") << '\n';
  write_text(ctx.path("assess.txt"), s.str());
  std::cout << s.str();
  return 0;
}

ProfileConfig profile_config(const RunConfig& cfg, const CurveParams& curve) {
  ProfileConfig pc;
  pc.spec = cfg.spec(curve);
  pc.sim = cfg.sim();
  pc.traces = cfg.size("analysis.profile_traces");
  pc.poi_count = cfg.size("analysis.poi_count");
  pc.templates.full_covariance = cfg.flag("analysis.full_covariance");
  pc.templates.ridge = cfg.real("analysis.ridge");
  pc.jobs = static_cast<unsigned>(cfg.u64("jobs"));
  return pc;
}

int cmd_train(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  Rng rng(ctx.cfg.u64("seed"));
  const Profile p = build_profile(profile_config(ctx.cfg, curve), rng);
  write_model(ctx.path("model.sctm").string(), p.model);
  write_tcurve_csv(ctx.path("tcurve.csv").string(), p.t);
  std::ostringstream s;
  s << "windows=" << p.windows << "\nmax_abs_t=" << fmt(p.t.max_abs_t) << "\npoi=" << p.model.dim() << '\n';
  write_text(ctx.path("train.txt"), s.str());
  std::cout << s.str();
  return 0;
}

int cmd_classify(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  const ScalarTraceSpec spec = ctx.cfg.spec(curve);
  const SimConfig sim = ctx.cfg.sim();
  const TemplateModel model = read_model(required(ctx.cfg, "model"));
  std::vector<LeakageTrace> traces = read_traces(required(ctx.cfg, "traces"));
  const bool labelled = !ctx.cfg.str("markers").empty() && !ctx.cfg.str("labels").empty();
  if (labelled) read_swap_markers(ctx.cfg.str("markers"), ctx.cfg.str("labels"), traces);
  std::ostringstream csv, bits;
  csv << "trace_index,swap_index,window_start,window_end,cond_guess,probability\n";
  size_t total = 0, correct = 0;
  for (size_t t = 0; t < traces.size(); ++t) {
    const TraceAttack a = attack_trace(traces[t], model, spec, sim);
    const std::vector<int> truth = labelled ? traces[t].swap_conditions() : std::vector<int>{};
    for (size_t i = 0; i < a.bits.conditions.size(); ++i) {
      const auto& c = a.bits.conditions[i];
      const auto& w = a.windows.windows[i];
      csv << t << ',' << i << ',' << w.start << ',' << w.end << ',' << c.cond_guess << ',' << fmt(c.probability)
          << '\n';
      if (i < truth.size() && truth[i] >= 0) {
        ++total;
        correct += c.cond_guess == truth[i];
      }
    }
    bits << "k=" << to_hex(a.bits.value()) << '\n';
    write_windows_csv(ctx.path("windows_" + std::to_string(t) + ".csv").string(), a.windows);
  }
  write_text(ctx.path("predictions.csv"), csv.str());
  write_text(ctx.path("bits.txt"), bits.str());
  if (total) std::cout << "accuracy=" << fmt(static_cast<double>(correct) / static_cast<double>(total)) << '\n';
  std::cout << "traces=" << traces.size() << '\n';
  return 0;
}

int cmd_attack(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  Rng rng(ctx.cfg.u64("seed"));
  TemplateModel model;
  if (ctx.cfg.str("model").empty()) {
    model = build_profile(profile_config(ctx.cfg, curve), rng).model;
    write_model(ctx.path("model.sctm").string(), model);
  } else {
    model = read_model(ctx.cfg.str("model"));
  }
  AttackConfig ac;
  ac.spec = ctx.cfg.spec(curve);
  ac.sim = ctx.cfg.sim();
  ac.signatures = ctx.cfg.size("attack.signatures");
  ac.leak_bits = ctx.cfg.size("attack.leak_bits");
  ac.max_tries = ctx.cfg.size("attack.max_tries");
  ac.jobs = static_cast<unsigned>(ctx.cfg.u64("jobs"));
  const AttackResult r = run_attack(ac, model, rng);

  std::ostringstream csv, sigs;
  csv << "signature,swaps,correct_conditions,correct_bits,nonce_verified\n";
  for (size_t i = 0; i < r.signatures.size(); ++i) {
    const auto& s = r.signatures[i];
    csv << i << ',' << s.recovered.conditions.size() << ',' << s.correct_conditions << ',' << s.correct_bits << ','
        << (s.nonce_verified ? 1 : 0) << '\n';
    write_signature(sigs, s.signature);
  }
  write_text(ctx.path("attack.csv"), csv.str());
  write_text(ctx.path("signatures.txt"), sigs.str());
  std::ostringstream key;
  write_key(key, r.key, false);
  write_text(ctx.path("public.txt"), key.str());
  const bool ok = r.recovered_d && *r.recovered_d == r.key.d.value;
  std::ostringstream res;
  res << "method=" << r.method << '\n';
  if (r.recovered_d) res << "d=" << to_hex(*r.recovered_d) << '\n';
  res << "key_recovered=" << (ok ? 1 : 0) << '\n';
  write_text(ctx.path("result.txt"), res.str());
  std::cout << csv.str() << res.str();
  if (!ok) throw RecoveryFailed(r.failure.empty() ? "private key not recovered" : r.failure);
  return 0;
}

RecoveryStrategy strategy_from(const std::string& name, size_t tries, uint64_t seed) {
  if (name == "direct") return RecoveryStrategy::direct();
  if (name == "subset_retry") return RecoveryStrategy::subset_retry(tries, seed);
  throw ConfigError("strategy must be direct or subset_retry");
}

int cmd_recover(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  auto kin = open_in(required(ctx.cfg, "key"));
  const KeyPair key = read_key(kin, curve);
  auto lin = open_in(required(ctx.cfg, "leaks"));
  const auto records = read_leak_records(lin);
  const KeyRecovery kr =
      recover_key(build_hnp(records, curve), curve, key.Q,
                  strategy_from(ctx.cfg.str("recover.strategy"), ctx.cfg.size("recover.max_tries"), ctx.cfg.u64("seed")));
  std::ostringstream s;
  s << "d=" << to_hex(kr.d) << "\nattempts=" << kr.attempts << '\n';
  write_text(ctx.path("recovered.txt"), s.str());
  std::cout << s.str();
  return 0;
}

int cmd_experiment(Context& ctx) {
  const CurveParams curve = ctx.cfg.curve();
  const auto kind = ctx.cfg.str("experiment.strategy");
  strategy_from(kind, 0, 0);
  std::vector<ExperimentResult> rows;
  uint64_t point = 0;
  for (size_t l : ctx.cfg.sizes("experiment.leak_bits"))
    for (size_t m : ctx.cfg.sizes("experiment.signatures"))
      for (double e : ctx.cfg.reals("experiment.error_rates")) {
        ExperimentConfig ec;
        ec.curve = &curve;
        ec.leak_bits = l;
        ec.signatures = m;
        ec.error_rate = e;
        ec.trials = ctx.cfg.size("experiment.trials");
        ec.seed = mix_seed(ctx.cfg.u64("seed"), point++);
        ec.strategy = kind == "direct" ? RecoveryStrategy::Kind::Direct : RecoveryStrategy::Kind::SubsetRetry;
        ec.max_tries = ctx.cfg.size("experiment.max_tries");
        ec.jobs = static_cast<unsigned>(ctx.cfg.u64("jobs"));
        rows.push_back(run_experiment(ec));
        const auto& r = rows.back();
        std::cout << "l=" << l << " m=" << m << " e=" << fmt(e) << " success=" << r.successes << "/" << ec.trials
                  << '\n';
      }
  write_experiment_csv(ctx.path("experiment.csv").string(), rows, ctx.cfg.flag("experiment.timing"));
  return 0;
}

void write_run_files(const Context& ctx) {
  write_text(ctx.path("config.txt"), ctx.cfg.dump());
  std::ostringstream s;
  s << "command=" << ctx.command << "\nseed=" << ctx.cfg.str("seed") << "\nversion=" << NONCELAB_VERSION << '\n';
  write_text(ctx.path("run.txt"), s.str());
}

int report(const char* kind, const std::string& msg, int code) {
  std::string clean = msg;
  for (auto& ch : clean)
    if (ch == '\n' || ch == '"') ch = '\'';
  std::cerr << "error kind=" << kind << " exit=" << code << " message=\"" << clean << "\"\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-swap leakage lab: simulate, assess, profile and attack ECDSA nonces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NONCELAB_VERSION);

  struct Flags {
    std::string config, seed, curve, variant, multiplier, jobs, out;
    std::vector<std::string> sets;
  } flags;

  const std::vector<std::pair<const char*, std::function<int(Context&)>>> commands = {
      {"keygen", cmd_keygen},     {"sign", cmd_sign},         {"verify", cmd_verify},
      {"simulate", cmd_simulate}, {"assess", cmd_assess},     {"train", cmd_train},
      {"classify", cmd_classify}, {"attack", cmd_attack},     {"recover", cmd_recover},
      {"experiment", cmd_experiment},
  };
  const std::map<std::string, std::string> help = {
      {"keygen", "generate a key pair"},
      {"sign", "sign digests (lab mode also writes the nonces)"},
      {"verify", "verify signatures against a public key"},
      {"simulate", "write simulated leakage traces with labels and markers"},
      {"assess", "Welch t-test over swap traces"},
      {"train", "profile the device and fit swap templates"},
      {"classify", "align traces and classify every swap"},
      {"attack", "simulate, align, classify and recover the private key"},
      {"recover", "lattice key recovery from known nonce bits"},
      {"experiment", "lattice success-rate grid"},
  };
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", flags.config, "key=value configuration file");
    sub->add_option("--seed", flags.seed, "random seed (falls back to NONCE_LAB_SEED)");
    sub->add_option("--curve", flags.curve, "built-in curve name or <file>[:name]");
    sub->add_option("--variant", flags.variant, "swap variant")
        ->check(CLI::IsMember({"plain", "libgcrypt", "masked", "combined"}));
    sub->add_option("--multiplier", flags.multiplier, "scalar multiplier")->check(CLI::IsMember({"ladder", "daa"}));
    sub->add_option("--jobs", flags.jobs, "worker threads");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--set", flags.sets, "override any configuration key (key=value)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), 1);
  }

  Context ctx;
  try {
    for (const auto& [name, fn] : commands) {
      if (!app.got_subcommand(name)) continue;
      ctx.command = name;
      if (!flags.config.empty()) ctx.cfg.load_file(flags.config);
      for (const auto& kv : flags.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        ctx.cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!flags.seed.empty()) {
        ctx.cfg.set("seed", flags.seed);
      } else if (!ctx.cfg.explicitly_set("seed")) {
        if (const char* env = std::getenv("NONCE_LAB_SEED"); env && *env) ctx.cfg.set("seed", env);
      }
      if (!flags.curve.empty()) ctx.cfg.set("curve", flags.curve);
      if (!flags.variant.empty()) ctx.cfg.set("variant", flags.variant);
      if (!flags.multiplier.empty()) ctx.cfg.set("multiplier", flags.multiplier);
      if (!flags.jobs.empty()) ctx.cfg.set("jobs", flags.jobs);
      if (!flags.out.empty()) ctx.cfg.set("out", flags.out);
      ctx.cfg.u64("seed");
      if (ctx.cfg.u64("jobs") < 1) throw ConfigError("jobs must be at least 1");
      ctx.out = ctx.cfg.str("out");
      fs::create_directories(ctx.out);
      write_run_files(ctx);
      return fn(ctx);
    }
    return report("UsageError", "no subcommand", 1);
  } catch (const AlignmentError& e) {
    return report(e.kind(), e.what(), 2);
  } catch (const RecoveryFailed& e) {
    return report(e.kind(), e.what(), 2);
  } catch (const noncelab::Error& e) {
    return report(e.kind(), e.what(), 1);
  } catch (const fs::filesystem_error& e) {
    return report("ConfigError", e.what(), 1);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 1);
  }
}

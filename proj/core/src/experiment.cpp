#include "noncelab/experiment.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "noncelab/errors.hpp"
#include "noncelab/field.hpp"
#include "parallel.hpp"

namespace noncelab {

namespace {

mpz_class pow2(size_t e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), 2, e);
  return v;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

AlignConfig align_config(const ScalarTraceSpec& spec, const SimConfig& sim) {
  AlignConfig a;
  a.curve = spec.curve;
  a.multiplier = spec.multiplier;
  a.variant = spec.variant.kind;
  a.sim = sim;
  return a;
}

Profile build_profile(const ProfileConfig& cfg, Rng& rng) {
  if (cfg.spec.curve == nullptr) throw ConfigError("profiling needs a curve");
  if (cfg.traces < 2) throw ConfigError("profiling needs at least two traces");
  // profiling runs on the attacker's own device, without the bursts
  SimConfig sim = cfg.sim;
  sim.interference.clear();
  const TraceSet set = generate_training_set(cfg.spec, cfg.traces, sim, rng, cfg.jobs);
  const AlignConfig ac = align_config(cfg.spec, sim);
  const size_t width = swap_window_width(ac);

  std::vector<ClassMoments> parts(set.traces.size(), ClassMoments(width));
  std::vector<FeatureMatrix> rows(cfg.templates.full_covariance ? set.traces.size() : 0);
  std::vector<std::vector<int>> labels(set.traces.size());
  detail::parallel_for(set.traces.size(), cfg.jobs, [&](size_t i) {
    const LeakageTrace& tr = set.traces[i];
    const AlignedSwapWindows w = align_swaps(tr, ac);
    const std::vector<int>& conds = set.labels[i];
    if (conds.size() != w.windows.size()) throw AlignmentError("window count differs from the swap count");
    FeatureMatrix f = window_features(tr, w.windows, sim.f_mod());
    for (size_t j = 0; j < f.size(); ++j) parts[i].add(f[j], conds[j]);
    labels[i] = conds;
    if (cfg.templates.full_covariance) rows[i] = std::move(f);
  });
  ClassMoments all(width);
  for (const auto& p : parts) all.merge(p);

  Profile out;
  out.windows = all.count(0) + all.count(1);
  out.t = welch_t(all);
  const std::vector<size_t> poi = select_poi(out.t, std::min(cfg.poi_count, width));
  if (cfg.templates.full_covariance) {
    FeatureMatrix flat;
    std::vector<int> flat_labels;
    for (size_t i = 0; i < rows.size(); ++i) {
      for (auto& r : rows[i]) flat.push_back(std::move(r));
      flat_labels.insert(flat_labels.end(), labels[i].begin(), labels[i].end());
    }
    out.model = fit_templates(flat, flat_labels, poi, cfg.templates);
  } else {
    out.model = fit_templates(all, poi, cfg.templates);
  }
  auto& meta = out.model.trained_on;
  meta["curve"] = cfg.spec.curve->name();
  meta["variant"] = std::string(to_string(cfg.spec.variant.kind));
  meta["multiplier"] = std::string(to_string(cfg.spec.multiplier));
  meta["noise_sigma"] = fmt(sim.noise_sigma);
  meta["f_mod"] = fmt(sim.f_mod());
  meta["window"] = std::to_string(width);
  meta["traces"] = std::to_string(cfg.traces);
  return out;
}

TraceAttack attack_trace(const LeakageTrace& trace, const TemplateModel& model, const ScalarTraceSpec& spec,
                         const SimConfig& sim) {
  TraceAttack out;
  out.windows = align_swaps(trace, align_config(spec, sim));
  out.bits = recover_nonce_bits(trace, model, out.windows, spec.multiplier, sim.f_mod());
  return out;
}

AttackResult run_attack(const AttackConfig& cfg, const TemplateModel& model, Rng& rng) {
  if (cfg.spec.curve == nullptr) throw ConfigError("attack needs a curve");
  if (cfg.signatures < 1) throw ConfigError("attack needs at least one signature");
  const CurveParams& curve = *cfg.spec.curve;
  const mpz_class& n = curve.order();
  const size_t b = curve.order_bits();

  AttackResult out;
  out.key = keygen(curve, rng);
  const uint64_t base = rng.next_u64();
  out.signatures.resize(cfg.signatures);
  detail::parallel_for(cfg.signatures, cfg.jobs, [&](size_t i) {
    Rng r(mix_seed(base, i));
    SignOptions so;
    so.multiplier = cfg.spec.multiplier;
    so.swap = cfg.spec.variant;
    so.lab_mode = true;
    const mpz_class z = r.below(pow2(b));
    const SignResult sr = sign(z, out.key, curve, r, so);
    SignatureAttack& sa = out.signatures[i];
    sa.signature = sr.signature;
    sa.true_nonce = sr.nonce->k.value;
    const LeakageTrace tr = simulate_scalar_mult(cfg.spec, sa.true_nonce, curve.generator(), cfg.sim, r);
    for (const auto& m : tr.of_kind(MarkerKind::Swap)) sa.interfered.push_back(m.interfered);
    sa.true_conditions = swap_conditions(cfg.spec.multiplier, Scalar::for_curve(sa.true_nonce, curve));
    sa.recovered = attack_trace(tr, model, cfg.spec, cfg.sim).bits;
    for (size_t j = 0; j < sa.true_conditions.size() && j < sa.recovered.conditions.size(); ++j)
      sa.correct_conditions += sa.recovered.conditions[j].cond_guess == sa.true_conditions[j];
    const mpz_class k = sa.recovered.value();
    for (size_t j = 0; j < b; ++j)
      sa.correct_bits += (sa.recovered.bits[b - 1 - j] == '1') == (mpz_tstbit(sa.true_nonce.get_mpz_t(), j) != 0);
    if (k > 0 && k < n) {
      const AffinePoint R = reference_multiply(k, curve.generator(), curve);
      sa.nonce_verified = !R.infinity && mod(R.x, n) == sa.signature.r;
    }
  });

  for (const auto& sa : out.signatures) {
    if (!sa.nonce_verified) continue;
    const Scalar d = recover_private_key(Scalar::for_curve(sa.recovered.value(), curve), sa.signature, curve);
    if (reference_multiply(d.value, curve.generator(), curve) == out.key.Q) {
      out.recovered_d = d.value;
      out.method = "nonce";
      return out;
    }
  }

  const size_t l = std::min(cfg.leak_bits, b);
  std::vector<LeakRecord> records;
  for (const auto& sa : out.signatures) {
    LeakRecord rec;
    rec.signature = sa.signature;
    rec.leak_bits = l;
    rec.known_lsbs = sa.recovered.value() % pow2(l);
    for (size_t j = 0; j < l; ++j) rec.confidence.push_back(sa.recovered.conditions[b - 1 - j].confidence());
    records.push_back(std::move(rec));
  }
  try {
    const KeyRecovery kr = recover_key(build_hnp(records, curve), curve, out.key.Q,
                                       RecoveryStrategy::subset_retry(cfg.max_tries, rng.next_u64()));
    out.recovered_d = kr.d;
    out.method = "lattice";
  } catch (const RecoveryFailed& e) {
    out.method = "failed";
    out.failure = e.what();
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (curve == nullptr) throw ConfigError("experiment needs a curve");
  if (leak_bits < 1 || leak_bits > curve->order_bits()) throw ConfigError("leak_bits must be in [1, bitlen(n)]");
  if (signatures < 1) throw ConfigError("signatures must be at least 1");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(error_rate >= 0 && error_rate <= 1)) throw ConfigError("error_rate must be in [0, 1]");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const CurveParams& curve = *cfg.curve;
  const size_t b = curve.order_bits();
  std::vector<char> ok(cfg.trials, 0);
  std::vector<double> secs(cfg.trials, 0), lll(cfg.trials, 0);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](size_t t) {
    Rng r(mix_seed(cfg.seed, t));
    const KeyPair key = keygen(curve, r);
    SignOptions so;
    so.lab_mode = true;
    std::vector<LeakRecord> records;
    for (size_t i = 0; i < cfg.signatures; ++i) {
      const SignResult sr = sign(r.below(pow2(b)), key, curve, r, so);
      LeakRecord rec;
      rec.signature = sr.signature;
      rec.leak_bits = cfg.leak_bits;
      rec.known_lsbs = sr.nonce->k.value % pow2(cfg.leak_bits);
      for (size_t j = 0; j < cfg.leak_bits; ++j)
        if (r.bernoulli(cfg.error_rate)) mpz_combit(rec.known_lsbs.get_mpz_t(), j);
      records.push_back(std::move(rec));
    }
    const RecoveryStrategy st = cfg.strategy == RecoveryStrategy::Kind::Direct
                                    ? RecoveryStrategy::direct()
                                    : RecoveryStrategy::subset_retry(cfg.max_tries, r.next_u64());
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const KeyRecovery kr = recover_key(build_hnp(records, curve), curve, key.Q, st);
      ok[t] = reference_multiply(kr.d, curve.generator(), curve) == key.Q;
      lll[t] = kr.max_lll_seconds;
    } catch (const RecoveryFailed&) {
    }
    secs[t] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  ExperimentResult res;
  res.cfg = cfg;
  for (size_t t = 0; t < cfg.trials; ++t) {
    res.successes += ok[t] != 0;
    res.mean_seconds += secs[t];
    res.max_lll_seconds = std::max(res.max_lll_seconds, lll[t]);
  }
  res.mean_seconds /= static_cast<double>(cfg.trials);
  res.success_rate = static_cast<double>(res.successes) / static_cast<double>(cfg.trials);
  return res;
}

void write_experiment_csv(const std::string& path, const std::vector<ExperimentResult>& rows, bool with_timing) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "leak_bits,signatures,error_rate,trials,successes,mean_seconds\n";
  for (const auto& r : rows)
    out << r.cfg.leak_bits << ',' << r.cfg.signatures << ',' << fmt(r.cfg.error_rate) << ',' << r.cfg.trials << ','
        << r.successes << ',' << (with_timing ? fmt(r.mean_seconds) : std::string("NA")) << '\n';
}

}  // namespace noncelab

#include "noncelab/tracesim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "noncelab/errors.hpp"
#include "parallel.hpp"
#include "traced_ops.hpp"

namespace noncelab {

void SimConfig::validate() const {
  if (!(f_cpu > 0) || !(mod_ratio > 0) || !(sample_rate > 0))
    throw ConfigError("f_cpu, mod_ratio and sample_rate must be positive");
  if (sample_rate < 4 * f_mod())
    throw ConfigError("sample_rate below 4 * f_cpu * mod_ratio (Nyquist for the modulated band)");
  if (samples_per_event < 8) throw ConfigError("samples_per_event must be at least 8");
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be non-negative");
  if (!(snr_scale > 0)) throw ConfigError("snr_scale must be positive");
  if (interruption_prob < 0 || interruption_prob > 1) throw ConfigError("interruption_prob outside [0, 1]");
  if (interruption_min > interruption_max) throw ConfigError("interruption_min above interruption_max");
  for (const auto& s : interference) {
    if (s.start_fraction < 0 || s.start_fraction > 1 || s.length_fraction < 0 || s.length_fraction > 1)
      throw ConfigError("interference fractions must lie in [0, 1]");
    if (s.amplitude < 0) throw ConfigError("interference amplitude must be non-negative");
  }
}

SimConfig hardware_profile() {
  SimConfig c;
  c.f_cpu = 768e6;
  c.sample_rate = 2.5e9;
  return c;
}

std::vector<TraceMarker> LeakageTrace::of_kind(MarkerKind kind) const {
  std::vector<TraceMarker> out;
  for (const auto& m : markers)
    if (m.kind == kind) out.push_back(m);
  return out;
}

std::vector<int> LeakageTrace::swap_conditions() const {
  std::vector<int> out;
  for (const auto& m : markers)
    if (m.kind == MarkerKind::Swap) out.push_back(m.cond);
  return out;
}

uint32_t event_duration(OpKind op, const SimConfig& cfg) {
  const uint32_t spe = cfg.samples_per_event;
  if (is_mul_like(op)) return spe;
  if (op == OpKind::FieldAddSub) return std::max(1u, spe / 4);
  return std::max(1u, spe / 8);
}

namespace {

struct Layout {
  std::vector<size_t> start;  // per event, plus one past the end
  size_t length = 0;
  size_t gap_at = SIZE_MAX;  // event index the interruption precedes
  size_t gap_len = 0;
};

Layout layout(std::span<const SwapTraceEvent> events, const SimConfig& cfg, Rng& rng) {
  Layout L;
  if (events.size() > 1 && cfg.interruption_prob > 0 && rng.bernoulli(cfg.interruption_prob)) {
    L.gap_at = 1 + rng.below(events.size() - 1);
    L.gap_len = cfg.interruption_min + rng.below(cfg.interruption_max - cfg.interruption_min + 1);
  }
  L.start.resize(events.size() + 1);
  size_t t = cfg.pad;
  for (size_t i = 0; i < events.size(); ++i) {
    if (i == L.gap_at) t += L.gap_len;
    L.start[i] = t;
    t += event_duration(events[i].op, cfg);
  }
  L.start[events.size()] = t;
  L.length = t + cfg.pad;
  return L;
}

LeakageTrace render(std::span<const SwapTraceEvent> events, const std::vector<EventSegment>& segments,
                    const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  if (events.empty()) throw DomainError("empty event stream");
  const Layout L = layout(events, cfg, rng);

  std::vector<double> env(L.length, cfg.baseline);
  if (L.gap_at != SIZE_MAX) {
    const size_t g0 = L.start[L.gap_at] - L.gap_len;
    std::fill(env.begin() + static_cast<ptrdiff_t>(g0), env.begin() + static_cast<ptrdiff_t>(g0 + L.gap_len), 0.0);
  }
  for (size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const size_t dur = event_duration(e.op, cfg);
    const double rel = static_cast<double>(e.leak_value) / 64.0 * cfg.snr_scale;
    if (is_mul_like(e.op)) {
      const double level = cfg.arith_floor + cfg.arith_gain * rel;
      for (size_t j = 0; j < dur; ++j) {
        const double s = std::sin(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(dur));
        env[L.start[i] + j] += level * s * s;
      }
    } else {
      const double level =
          e.op == OpKind::FieldAddSub ? cfg.addsub_floor + cfg.arith_gain * rel : rel;
      for (size_t j = 0; j < dur; ++j) env[L.start[i] + j] += level;
    }
  }

  LeakageTrace tr;
  tr.sample_rate = cfg.sample_rate;
  tr.samples.resize(L.length);
  const double w = 2 * std::numbers::pi * cfg.f_mod() / cfg.sample_rate;
  for (size_t t = 0; t < L.length; ++t) {
    double v = env[t] * std::cos(w * static_cast<double>(t));
    if (cfg.noise_sigma > 0) v += cfg.noise_sigma * rng.normal();
    tr.samples[t] = static_cast<float>(v);
  }

  for (const auto& s : segments) {
    const MarkerKind k = s.kind == SegmentKind::Swap ? MarkerKind::Swap : MarkerKind::Step;
    tr.markers.push_back({k, L.start[s.first_event], L.start[s.end_event], OpKind::MaskCompute, s.cond, s.index});
  }
  if (cfg.event_markers) {
    for (size_t i = 0; i < events.size(); ++i)
      tr.markers.push_back({MarkerKind::Event, L.start[i], L.start[i] + event_duration(events[i].op, cfg),
                            events[i].op, events[i].ground_truth_cond, static_cast<uint32_t>(i)});
  }
  std::stable_sort(tr.markers.begin(), tr.markers.end(),
                   [](const TraceMarker& a, const TraceMarker& b) { return a.start < b.start; });

  std::ostringstream f;
  f.precision(17);
  f << cfg.f_cpu;
  tr.meta["f_cpu"] = f.str();
  if (L.gap_at != SIZE_MAX)
    tr.meta["interruption"] = std::to_string(L.start[L.gap_at] - L.gap_len) + ":" + std::to_string(L.gap_len);
  return tr;
}

// RBJ band-pass biquad (constant 0 dB peak gain).
struct Biquad {
  double b0, b1, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  Biquad(double f0, double fs, double q) {
    const double w0 = 2 * std::numbers::pi * f0 / fs;
    const double alpha = std::sin(w0) / (2 * q);
    const double a0 = 1 + alpha;
    b0 = alpha / a0;
    b1 = 0;
    b2 = -alpha / a0;
    a1 = -2 * std::cos(w0) / a0;
    a2 = (1 - alpha) / a0;
  }
  double operator()(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

LeakageTrace synthesize(const EventRecorder& rec, const SimConfig& cfg, Rng& rng) {
  return render(rec.events(), rec.segments(), cfg, rng);
}

LeakageTrace synthesize(std::span<const SwapTraceEvent> events, const SimConfig& cfg, Rng& rng) {
  return render(events, {}, cfg, rng);
}

LeakageTrace inject_interference(LeakageTrace trace, const SimConfig& cfg, Rng& rng) {
  const size_t N = trace.samples.size();
  for (const auto& spec : cfg.interference) {
    const size_t start = std::min(N, static_cast<size_t>(spec.start_fraction * static_cast<double>(N)));
    const size_t len = std::min(N - start, static_cast<size_t>(spec.length_fraction * static_cast<double>(N)));
    if (len == 0) continue;
    std::vector<double> burst(len);
    Biquad bq(cfg.f_mod(), trace.sample_rate, 2.0);
    double energy = 0;
    for (auto& b : burst) {
      b = bq(rng.normal());
      energy += b * b;
    }
    const double scale = energy > 0 ? spec.amplitude / std::sqrt(energy / static_cast<double>(len)) : 0;
    for (size_t i = 0; i < len; ++i) trace.samples[start + i] += static_cast<float>(burst[i] * scale);
    for (auto& m : trace.markers)
      if (m.start < start + len && m.end > start) m.interfered = true;
    std::string& spans = trace.meta["interference"];
    if (!spans.empty()) spans += ';';
    spans += std::to_string(start) + ":" + std::to_string(len);
  }
  return trace;
}

mpz_class training_nonce(Multiplier m, size_t bits, bool swap) {
  if (bits == 0) throw DomainError("nonce width must be positive");
  mpz_class k = 0;
  if (!swap) {
    // Ladder: all ones, so only the top k_i xor k_{i+1} is one.
    if (m == Multiplier::Ladder) {
      mpz_ui_pow_ui(k.get_mpz_t(), 2, bits);
      return k - 1;
    }
    mpz_setbit(k.get_mpz_t(), bits - 1);
    return k;
  }
  for (size_t i = 0; i < bits; ++i) {
    // Ladder: alternating bits from the MSB make every k_i xor k_{i+1} one.
    const bool set = m == Multiplier::Ladder ? (bits - 1 - i) % 2 == 0 : true;
    if (set) mpz_setbit(k.get_mpz_t(), i);
  }
  return k;
}

LeakageTrace simulate_scalar_mult(const ScalarTraceSpec& spec, const mpz_class& k, const AffinePoint& P,
                                  const SimConfig& cfg, Rng& rng) {
  const CurveParams& curve = *spec.curve;
  EventRecorder rec;
  MultOptions opt{spec.variant, &rec, &rng};
  detail::scalar_multiply_unchecked(spec.multiplier, Scalar{k, curve.order_bits()}, P, curve, opt);
  LeakageTrace tr = synthesize(rec, cfg, rng);
  tr = inject_interference(std::move(tr), cfg, rng);
  tr.meta["curve"] = curve.name();
  tr.meta["variant"] = std::string(to_string(spec.variant.kind));
  tr.meta["multiplier"] = std::string(to_string(spec.multiplier));
  return tr;
}

namespace {

AffinePoint random_point(const CurveParams& curve, Rng& rng) {
  // Random x until it lies on the curve, then a square root via Tonelli-Shanks (mpz).
  for (;;) {
    const FieldElement x = curve.fe(rng.below(curve.p()));
    const FieldElement r = curve.rhs(x);
    if (r.is_zero() || !r.is_square()) continue;
    const mpz_class& p = curve.p();
    mpz_class q = p - 1;
    unsigned s = 0;
    while (mpz_even_p(q.get_mpz_t())) {
      q /= 2;
      ++s;
    }
    FieldElement z = curve.fe(2);
    while (z.is_square()) z = z + curve.field().one();
    FieldElement c = z.pow(q);
    FieldElement t = r.pow(q);
    FieldElement y = r.pow((q + 1) / 2);
    unsigned m = s;
    while (!(t == curve.field().one())) {
      unsigned i = 0;
      FieldElement t2 = t;
      while (!(t2 == curve.field().one())) {
        t2 = t2.square();
        ++i;
      }
      FieldElement b = c;
      for (unsigned j = 0; j + i + 1 < m; ++j) b = b.square();
      m = i;
      c = b.square();
      t = t * c;
      y = y * b;
    }
    if (rng.bernoulli(0.5)) y = -y;
    return {x.value(), y.value(), false};
  }
}

}  // namespace

TraceSet generate_training_set(const ScalarTraceSpec& spec, size_t count, const SimConfig& cfg, Rng& rng,
                               unsigned jobs) {
  if (count < 1) throw DomainError("training set needs at least one trace");
  cfg.validate();
  const uint64_t base = rng.next_u64();
  TraceSet set;
  set.traces.resize(count);
  set.labels.resize(count);
  const size_t bits = spec.curve->order_bits();
  detail::parallel_for(count, jobs, [&](size_t i) {
    Rng r(mix_seed(base, i));
    const bool swap = i % 2 == 1;
    const AffinePoint P = random_point(*spec.curve, r);
    set.traces[i] = simulate_scalar_mult(spec, training_nonce(spec.multiplier, bits, swap), P, cfg, r);
    set.labels[i] = set.traces[i].swap_conditions();
  });
  return set;
}

TraceSet generate_swap_set(const ScalarTraceSpec& spec, size_t count_per_class, const SimConfig& cfg,
                           Rng& rng, unsigned jobs) {
  if (count_per_class < 1) throw DomainError("swap set needs at least one trace per class");
  cfg.validate();
  const CurveParams& curve = *spec.curve;
  const size_t n = 2 * count_per_class;
  std::vector<int> cls(n);
  for (size_t i = 0; i < n; ++i) cls[i] = i < count_per_class ? 0 : 1;
  for (size_t i = n; i > 1; --i) std::swap(cls[i - 1], cls[rng.below(i)]);
  const uint64_t base = rng.next_u64();
  TraceSet set;
  set.traces.resize(n);
  set.labels.resize(n);
  detail::parallel_for(n, jobs, [&](size_t i) {
    Rng r(mix_seed(base, i));
    auto rnd = [&] { return curve.fe(r.nonzero_below(curve.p())); };
    ProjectivePoint P{rnd(), rnd(), rnd()}, Q{rnd(), rnd(), rnd()};
    EventRecorder rec;
    swap_points(spec.variant, P, Q, static_cast<unsigned>(cls[i]), curve, &rec, &r);
    set.traces[i] = synthesize(rec, cfg, r);
    set.traces[i].meta["curve"] = curve.name();
    set.traces[i].meta["variant"] = std::string(to_string(spec.variant.kind));
    set.labels[i] = {cls[i]};
  });
  return set;
}

EventRecorder reference_step(const CurveParams& curve, Multiplier m, Rng& rng) {
  EventRecorder rec;
  const AffinePoint P = random_point(curve, rng);
  if (m == Multiplier::Ladder) {
    const ProjectivePoint s = curve.lift(P);
    ladder_step(s, point_double(s, curve), P, curve, &rec);
  } else {
    detail::TracedOps op(&rec);
    const ProjectivePoint R = curve.lift(random_point(curve, rng));
    rec.begin_step();
    const ProjectivePoint R2 = detail::add_complete(R, R, curve, op);
    detail::add_complete(R2, curve.lift(P), curve, op);
    rec.end_step();
  }
  return rec;
}

size_t step_samples(const CurveParams& curve, Multiplier m, const SimConfig& cfg) {
  Rng rng(1);
  const EventRecorder rec = reference_step(curve, m, rng);
  size_t total = 0;
  for (const auto& e : rec.events()) total += event_duration(e.op, cfg);
  return total;
}

size_t swap_samples(const CurveParams& curve, SwapKind kind, const SimConfig& cfg) {
  size_t events = 3 * swap_event_count(kind, curve.word_count());
  if (kind == SwapKind::Combined) events += 6 * curve.word_count();
  return events * event_duration(OpKind::DeltaCompute, cfg);
}

}  // namespace noncelab

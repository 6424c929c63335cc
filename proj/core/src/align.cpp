#include <algorithm>
#include <cmath>
#include <numeric>

#include "fft.hpp"
#include "noncelab/dsp.hpp"
#include "noncelab/errors.hpp"

namespace noncelab {

namespace {

std::vector<double> decimate(std::span<const double> x, size_t d) {
  if (d <= 1) return {x.begin(), x.end()};
  std::vector<double> out(x.size() / d);
  for (size_t i = 0; i < out.size(); ++i) {
    double s = 0;
    for (size_t j = 0; j < d; ++j) s += x[i * d + j];
    out[i] = s / static_cast<double>(d);
  }
  return out;
}

// Normalised cross-correlation of t against every offset of x.
std::vector<double> ncc(std::span<const double> x, std::span<const double> t) {
  const size_t L = t.size();
  if (x.size() < L || L < 2) return {};
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(L);
  std::vector<double> tr(L);
  double tn = 0;
  for (size_t j = 0; j < L; ++j) {
    tr[L - 1 - j] = t[j] - tm;
    tn += (t[j] - tm) * (t[j] - tm);
  }
  tn = std::sqrt(tn);
  const std::vector<double> c = detail::convolve(x, tr);
  const size_t n = x.size() - L + 1;
  std::vector<double> s1(x.size() + 1, 0.0), s2(x.size() + 1, 0.0);
  for (size_t i = 0; i < x.size(); ++i) {
    s1[i + 1] = s1[i] + x[i];
    s2[i + 1] = s2[i] + x[i] * x[i];
  }
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double sum = s1[i + L] - s1[i];
    const double var = (s2[i + L] - s2[i]) - sum * sum / static_cast<double>(L);
    out[i] = var > 1e-12 && tn > 0 ? c[i + L - 1] / (std::sqrt(var) * tn) : 0.0;
  }
  return out;
}

double ncc_at(std::span<const double> x, size_t pos, std::span<const double> t) {
  const size_t L = t.size();
  if (pos + L > x.size()) return -1;
  double xm = 0, tm = 0;
  for (size_t j = 0; j < L; ++j) {
    xm += x[pos + j];
    tm += t[j];
  }
  xm /= static_cast<double>(L);
  tm /= static_cast<double>(L);
  double num = 0, dx = 0, dt = 0;
  for (size_t j = 0; j < L; ++j) {
    const double a = x[pos + j] - xm, b = t[j] - tm;
    num += a * b;
    dx += a * a;
    dt += b * b;
  }
  return dx > 1e-12 && dt > 0 ? num / std::sqrt(dx * dt) : 0.0;
}

// Smoother than the rectified-median envelope, so steps stay detectable at
// low SNR; the peak pattern still comes from activity_envelope.
std::vector<double> detection_envelope(std::span<const float> x, double fs, double f_mod) {
  return demodulate(x, fs, f_mod, f_mod / 4);
}

struct StepTemplate {
  std::vector<double> env;  // one step of the activity envelope
  size_t step_len;
  size_t swap_len;
};

StepTemplate make_template(const AlignConfig& cfg, double f_mod_override = 0) {
  SimConfig sim = cfg.sim;
  sim.noise_sigma = 0;
  sim.interference.clear();
  sim.interruption_prob = 0;
  sim.event_markers = false;
  sim.pad = 4 * sim.samples_per_event;
  Rng rng(0x5eed);
  const EventRecorder rec = reference_step(*cfg.curve, cfg.multiplier, rng);
  const LeakageTrace tr = synthesize(rec, sim, rng);
  const double f_mod = f_mod_override > 0 ? f_mod_override : sim.f_mod();
  const std::vector<double> env = detection_envelope(tr.samples, sim.sample_rate, f_mod);
  StepTemplate t;
  t.step_len = step_samples(*cfg.curve, cfg.multiplier, sim);
  t.swap_len = swap_samples(*cfg.curve, cfg.variant, sim);
  t.env.assign(env.begin() + sim.pad, env.begin() + static_cast<ptrdiff_t>(sim.pad + t.step_len));
  return t;
}

struct Detection {
  size_t pos;
  double score;
  bool filled;
};

std::vector<Detection> detect_steps(std::span<const double> env, const StepTemplate& tpl, const AlignConfig& cfg) {
  const size_t D = std::max<size_t>(1, cfg.decimation);
  const std::vector<double> xd = decimate(env, D);
  const std::vector<double> td = decimate(tpl.env, D);
  const std::vector<double> c = ncc(xd, td);
  const size_t radius = std::max<size_t>(1, tpl.step_len / (2 * D));

  std::vector<size_t> cand;
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] >= cfg.threshold) cand.push_back(i);
  std::sort(cand.begin(), cand.end(), [&](size_t a, size_t b) { return c[a] > c[b] || (c[a] == c[b] && a < b); });
  std::vector<size_t> taken;  // sorted decimated positions
  for (size_t i : cand) {
    auto it = std::lower_bound(taken.begin(), taken.end(), i);
    if (it != taken.end() && *it - i < radius) continue;
    if (it != taken.begin() && i - *(it - 1) < radius) continue;
    taken.insert(it, i);
  }

  std::vector<Detection> out;
  for (size_t i : taken) {
    const size_t centre = i * D;
    size_t best = centre;
    double best_s = -2;
    const size_t lo = centre >= D ? centre - D : 0;
    for (size_t p = lo; p <= centre + D; ++p) {
      const double s = ncc_at(env, p, tpl.env);
      if (s > best_s) {
        best_s = s;
        best = p;
      }
    }
    out.push_back({best, best_s, false});
  }
  return out;
}

size_t refine(std::span<const double> env, const StepTemplate& tpl, size_t centre, size_t D, double* score) {
  size_t best = centre;
  double best_s = -2;
  const size_t lo = centre >= D ? centre - D : 0;
  const size_t hi = std::min(centre + D, env.size() - tpl.env.size());
  for (size_t p = lo; p <= hi; ++p) {
    const double s = ncc_at(env, p, tpl.env);
    if (s > best_s) {
      best_s = s;
      best = p;
    }
  }
  *score = best_s;
  return best;
}

// Follows the step period from the strongest match in both directions,
// searching only near the expected position (further out when the run
// may be interrupted).
std::vector<Detection> track_steps(std::span<const double> env, const StepTemplate& tpl, const AlignConfig& cfg) {
  const size_t D = std::max<size_t>(1, cfg.decimation);
  const std::vector<double> xd = decimate(env, D);
  const std::vector<double> td = decimate(tpl.env, D);
  const std::vector<double> c = ncc(xd, td);
  if (c.empty()) throw AlignmentError("trace shorter than one multiplier step");
  const size_t anchor = static_cast<size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  if (c[anchor] < cfg.threshold) throw AlignmentError("no multiplier step matched the template");

  const auto period = static_cast<ptrdiff_t>(tpl.step_len + tpl.swap_len);
  const auto tol = static_cast<ptrdiff_t>(std::max<size_t>(1, cfg.sim.samples_per_event / (8 * D)));
  const ptrdiff_t extra =
      cfg.sim.interruption_prob > 0 ? static_cast<ptrdiff_t>(cfg.sim.interruption_max / D) + tol : 0;
  const double weak = cfg.threshold / 2;
  const auto last = static_cast<ptrdiff_t>(c.size()) - 1;

  auto best_in = [&](ptrdiff_t lo, ptrdiff_t hi) {
    lo = std::max<ptrdiff_t>(lo, 0);
    hi = std::min(hi, last);
    ptrdiff_t b = lo;
    for (ptrdiff_t i = lo; i <= hi; ++i)
      if (c[static_cast<size_t>(i)] > c[static_cast<size_t>(b)]) b = i;
    return b;
  };
  auto detect = [&](ptrdiff_t i) {
    Detection d{};
    d.pos = refine(env, tpl, static_cast<size_t>(i) * D, D, &d.score);
    return d;
  };

  std::vector<Detection> fwd{detect(static_cast<ptrdiff_t>(anchor))}, back;
  // Targets are taken from the last confident step so noisy matches do not
  // let the chain drift.
  ptrdiff_t base = static_cast<ptrdiff_t>(fwd.back().pos), hops = 0;
  for (;;) {
    const ptrdiff_t target = (base + (hops + 1) * period) / static_cast<ptrdiff_t>(D);
    if (target - tol > last) break;
    ptrdiff_t b = best_in(target - tol, target + tol);
    if (extra && c[static_cast<size_t>(b)] < weak) {
      const ptrdiff_t b2 = best_in(target - tol, target + extra);
      if (c[static_cast<size_t>(b2)] >= weak) b = b2;
    }
    fwd.push_back(detect(b));
    ++hops;
    if (fwd.back().score >= cfg.threshold) {
      base = static_cast<ptrdiff_t>(fwd.back().pos);
      hops = 0;
    }
  }
  base = static_cast<ptrdiff_t>(fwd.front().pos);
  hops = 0;
  for (;;) {
    const ptrdiff_t target = (base - (hops + 1) * period) / static_cast<ptrdiff_t>(D);
    if (target + tol < 0) break;
    ptrdiff_t b = best_in(target - tol, target + tol);
    if (extra && c[static_cast<size_t>(b)] < weak) {
      const ptrdiff_t b2 = best_in(target - extra, target + tol);
      if (c[static_cast<size_t>(b2)] >= weak) b = b2;
    }
    back.push_back(detect(b));
    ++hops;
    if (back.back().score >= cfg.threshold) {
      base = static_cast<ptrdiff_t>(back.back().pos);
      hops = 0;
    }
  }
  std::vector<Detection> out(back.rbegin(), back.rend());
  out.insert(out.end(), fwd.begin(), fwd.end());
  return out;
}

// The chain is contiguous: surplus steps come off the weaker end, missing
// ones are added at the nominal period on the side with room.
void fit_count(std::vector<Detection>& det, size_t expected, size_t period, size_t n_samples, size_t step_len) {
  while (det.size() > expected) {
    if (det.front().score < det.back().score)
      det.erase(det.begin());
    else
      det.pop_back();
  }
  while (det.size() < expected) {
    if (det.back().pos + period + step_len <= n_samples)
      det.push_back({det.back().pos + period, 0.0, true});
    else if (det.front().pos >= period)
      det.insert(det.begin(), {det.front().pos - period, 0.0, true});
    else
      throw AlignmentError("cannot place missing multiplier steps");
  }
}

}  // namespace

size_t swap_window_width(const AlignConfig& cfg) {
  return swap_samples(*cfg.curve, cfg.variant, cfg.sim) + 2 * cfg.window_margin;
}

AlignedSwapWindows align_swaps(const LeakageTrace& trace, const AlignConfig& cfg) {
  if (cfg.curve == nullptr) throw ConfigError("alignment needs a curve");
  cfg.sim.validate();
  const StepTemplate tpl = make_template(cfg);
  if (trace.samples.size() < tpl.step_len) throw AlignmentError("trace shorter than one multiplier step");
  const std::vector<double> env = detection_envelope(trace.samples, trace.sample_rate, cfg.sim.f_mod());
  std::vector<Detection> det = track_steps(env, tpl, cfg);

  const size_t expected = cfg.expected_steps ? cfg.expected_steps : cfg.curve->order_bits();
  if (det.size() * 2 < expected) throw AlignmentError("too few multiplier steps detected");
  fit_count(det, expected, tpl.step_len + tpl.swap_len, trace.samples.size(), tpl.step_len);

  AlignedSwapWindows out;
  const size_t W = tpl.swap_len + 2 * cfg.window_margin;
  const auto n = static_cast<ptrdiff_t>(trace.samples.size());
  for (const auto& d : det) {
    out.step_positions.push_back(d.pos);
    out.step_scores.push_back(d.score);
    ptrdiff_t s = cfg.multiplier == Multiplier::Ladder
                      ? static_cast<ptrdiff_t>(d.pos) - static_cast<ptrdiff_t>(tpl.swap_len + cfg.window_margin)
                      : static_cast<ptrdiff_t>(d.pos + tpl.step_len) - static_cast<ptrdiff_t>(cfg.window_margin);
    s = std::clamp<ptrdiff_t>(s, 0, std::max<ptrdiff_t>(0, n - static_cast<ptrdiff_t>(W)));
    out.windows.push_back({static_cast<size_t>(s), static_cast<size_t>(s) + W, d.score, d.filled});
  }
  const size_t p0 = det.front().pos;
  const size_t spe = cfg.sim.samples_per_event;
  if (p0 + tpl.step_len <= env.size()) {
    const size_t guard = 4 * spe;
    const size_t lo = p0 >= guard ? p0 - guard : 0;
    const size_t hi = std::min(trace.samples.size(), p0 + tpl.step_len + guard);
    const std::vector<double> act = activity_envelope(std::span<const float>(trace.samples).subspan(lo, hi - lo),
                                                      trace.sample_rate, cfg.sim.f_mod(), cfg.median_seconds);
    const auto groups = peak_groups(std::span<const double>(act).subspan(p0 - lo, tpl.step_len), spe / 3,
                                    spe + spe / 8);
    for (const auto& g : groups) out.first_step_pattern.push_back(g.size());
  }
  return out;
}

ScheduleDetection detect_schedule(const LeakageTrace& trace, const std::vector<double>& known_frequencies,
                                  const AlignConfig& cfg) {
  if (known_frequencies.empty()) throw ConfigError("no candidate frequencies");
  if (cfg.curve == nullptr) throw ConfigError("schedule detection needs a curve");
  ScheduleDetection out;
  std::vector<double> ncc_top, energy;
  for (double f : known_frequencies) {
    AlignConfig c = cfg;
    c.sim.f_cpu = f;
    c.sim.validate();
    const double f_mod = c.sim.f_mod();
    // narrow band so neighbouring candidate carriers are rejected
    const FilterSpec band{f_mod, f_mod / 4};
    const std::vector<double> bp = bandpass(trace.samples, trace.sample_rate, band);
    const std::vector<double> env = rectify_median(bp, trace.sample_rate, c.median_seconds);

    SimConfig sim = c.sim;
    sim.noise_sigma = 0;
    sim.interference.clear();
    sim.interruption_prob = 0;
    sim.event_markers = false;
    sim.pad = 4 * sim.samples_per_event;
    Rng rng(0x5eed);
    const EventRecorder rec = reference_step(*c.curve, c.multiplier, rng);
    const LeakageTrace tt = synthesize(rec, sim, rng);
    const std::vector<double> tenv =
        rectify_median(bandpass(tt.samples, sim.sample_rate, band), sim.sample_rate, c.median_seconds);
    StepTemplate tpl;
    tpl.step_len = step_samples(*c.curve, c.multiplier, sim);
    tpl.swap_len = swap_samples(*c.curve, c.variant, sim);
    tpl.env.assign(tenv.begin() + sim.pad, tenv.begin() + static_cast<ptrdiff_t>(sim.pad + tpl.step_len));

    double top = 0;
    if (env.size() >= tpl.step_len) {
      AlignConfig probe = c;
      probe.threshold = -1;
      std::vector<Detection> det = detect_steps(env, tpl, probe);
      std::sort(det.begin(), det.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
      const size_t k = std::min<size_t>(det.size(), 8);
      for (size_t i = 0; i < k; ++i) top += det[i].score;
      if (k) top /= static_cast<double>(k);
    }
    double e = 0;
    for (double v : env) e += v * v;
    ncc_top.push_back(top);
    energy.push_back(env.empty() ? 0 : e / static_cast<double>(env.size()));
  }
  const double emax = *std::max_element(energy.begin(), energy.end());
  size_t best = 0;
  for (size_t i = 0; i < known_frequencies.size(); ++i) {
    const double s = ncc_top[i] * (emax > 0 ? energy[i] / emax : 0);
    out.scores.push_back(s);
    if (s > out.scores[best]) best = i;
  }
  out.f_cpu = known_frequencies[best];
  out.score = out.scores[best];
  out.match = ncc_top[best] >= cfg.threshold;
  return out;
}

}  // namespace noncelab

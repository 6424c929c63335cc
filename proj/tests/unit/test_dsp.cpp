#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "noncelab/dsp.hpp"
#include "noncelab/errors.hpp"

using namespace noncelab;

namespace {

std::vector<double> tone(double f, double fs, size_t n, double amp = 1) {
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * M_PI * f * static_cast<double>(i) / fs);
  return x;
}

double rms(const std::vector<double>& x, size_t from, size_t to) {
  double s = 0;
  for (size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

AlignConfig align_for(const CurveParams& c, const SimConfig& sim, Multiplier m = Multiplier::Ladder) {
  AlignConfig a;
  a.curve = &c;
  a.multiplier = m;
  a.sim = sim;
  return a;
}

}  // namespace

TEST(Bandpass, PassAndStop) {
  const double fs = 2.5e6, fc = 1.8e6 / 14;
  const FilterSpec spec{fc, fc / 2};
  const size_t n = 20000, edge = bandpass_taps(fs, spec);
  const auto pass = bandpass(tone(fc, fs, n), fs, spec);
  const double gain_db = 20 * std::log10(rms(pass, edge, n - edge) / (1 / std::sqrt(2.0)));
  EXPECT_LT(std::abs(gain_db), 1.0);
  const auto stop = bandpass(tone(2 * fc, fs, n), fs, spec);
  EXPECT_LT(20 * std::log10(rms(stop, edge, n - edge) / (1 / std::sqrt(2.0))), -40.0);
  const auto zero = bandpass(std::vector<double>(1000, 0.0), fs, spec);
  EXPECT_TRUE(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0; }));
  EXPECT_THROW(FilterSpec({fs / 2, fc}).validate(fs), ConfigError);
}

TEST(Bandpass, DelayCompensated) {
  const double fs = 2.5e6, fc = 1.8e6 / 14;
  const auto x = tone(fc, fs, 20000);
  const auto y = bandpass(x, fs, FilterSpec{fc, fc / 2});
  // phase lines up: correlation with the input is close to 1
  double xy = 0, xx = 0, yy = 0;
  for (size_t i = 2000; i < 18000; ++i) xy += x[i] * y[i], xx += x[i] * x[i], yy += y[i] * y[i];
  EXPECT_GT(xy / std::sqrt(xx * yy), 0.99);
}

TEST(Median, BasicProperties) {
  const std::vector<double> c(101, 2.5);
  EXPECT_EQ(sliding_median(c, 9), c);
  std::vector<double> spike(101, 0.0);
  spike[50] = 100;
  const auto m = sliding_median(spike, 9);
  EXPECT_TRUE(std::all_of(m.begin(), m.end(), [](double v) { return v == 0; }));
  const auto r = rectify_median(c, 1e6, 9e-6);
  EXPECT_EQ(rectify_median(r, 1e6, 9e-6), r);
  EXPECT_THROW(rectify_median(c, 1e6, 1e-6), ConfigError);
}

TEST(Stft, ToneAndZero) {
  const auto x = tone(1000.0 * 16, 1000.0 * 128, 4096);
  const StftGrid g = stft(x, 128, 64);
  EXPECT_EQ(g.frames, (4096 - 128) / 64 + 1);
  EXPECT_EQ(g.bins, 65u);
  for (size_t f = 0; f < g.frames; ++f) {
    size_t arg = 0;
    for (size_t b = 1; b < g.bins; ++b)
      if (g.at(f, b) > g.at(f, arg)) arg = b;
    EXPECT_EQ(arg, 16u);
  }
  const StftGrid z = stft(std::vector<double>(1024, 0.0), 128, 64);
  EXPECT_TRUE(std::all_of(z.magnitude.begin(), z.magnitude.end(), [](double v) { return v == 0; }));
}

TEST(Envelope, StepShowsEightGroups) {
  for (const char* name : {"secp128r1", "secp521r1"}) {
    const auto& c = builtin_curve(name);
    SimConfig sim;
    sim.noise_sigma = 0;
    Rng rng(1);
    const EventRecorder rec = reference_step(c, Multiplier::Ladder, rng);
    const LeakageTrace t = synthesize(rec, sim, rng);
    const auto env = activity_envelope(t.samples, t.sample_rate, sim.f_mod());
    const size_t spe = sim.samples_per_event;
    const auto groups = peak_groups(env, spe / 3, spe + spe / 8);
    std::vector<size_t> sizes;
    for (const auto& g : groups) sizes.push_back(g.size());
    EXPECT_EQ(sizes, (std::vector<size_t>{5, 2, 1, 2, 3, 1, 3, 3})) << name;
  }
}

TEST(Align, NoiselessWindowsMatchMarkers) {
  for (const char* name : {"toy16", "secp128r1", "secp521r1"})
    for (Multiplier m : {Multiplier::Ladder, Multiplier::DoubleAndAlwaysAdd}) {
      const auto& c = builtin_curve(name);
      SimConfig sim;
      sim.noise_sigma = 0;
      Rng rng(2);
      const ScalarTraceSpec spec{&c, m, {}};
      const auto t = simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng);
      const AlignConfig ac = align_for(c, sim, m);
      const auto w = align_swaps(t, ac);
      const auto swaps = t.of_kind(MarkerKind::Swap);
      ASSERT_EQ(w.windows.size(), c.order_bits()) << name;
      const long tol = 2 * sim.samples_per_event;
      for (size_t i = 0; i < swaps.size(); ++i) {
        EXPECT_LE(w.windows[i].start, swaps[i].start);
        EXPECT_GE(w.windows[i].end, swaps[i].end);
        EXPECT_LE(std::labs(static_cast<long>(w.windows[i].start + ac.window_margin) -
                            static_cast<long>(swaps[i].start)),
                  tol);
      }
      if (m == Multiplier::Ladder)
        EXPECT_EQ(w.first_step_pattern, (std::vector<size_t>{5, 2, 1, 2, 3, 1, 3, 3})) << name;
    }
}

TEST(Align, SurvivesInterruption) {
  const auto& c = builtin_curve("secp128r1");
  SimConfig sim;
  sim.noise_sigma = 0.5;
  sim.interruption_prob = 1;
  Rng rng(3);
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
  const auto t = simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng);
  const AlignConfig ac = align_for(c, sim);
  const auto w = align_swaps(t, ac);
  const auto swaps = t.of_kind(MarkerKind::Swap);
  ASSERT_EQ(w.windows.size(), swaps.size());
  size_t good = 0;
  for (size_t i = 0; i < swaps.size(); ++i)
    good += w.windows[i].start <= swaps[i].start && w.windows[i].end >= swaps[i].end;
  EXPECT_GE(good, swaps.size() - 2);
}

TEST(Align, PureNoiseFails) {
  const auto& c = builtin_curve("secp128r1");
  SimConfig sim;
  Rng rng(4);
  LeakageTrace t;
  t.sample_rate = sim.sample_rate;
  for (int i = 0; i < 400000; ++i) t.samples.push_back(static_cast<float>(rng.normal()));
  EXPECT_THROW(align_swaps(t, align_for(c, sim)), AlignmentError);
}

TEST(Schedule, PicksTheRightClock) {
  const auto& c = builtin_curve("secp128r1");
  SimConfig sim;
  sim.noise_sigma = 0.5;
  Rng rng(5);
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
  const auto t = simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng);
  const auto det = detect_schedule(t, {sim.f_cpu, 1.4e6}, align_for(c, sim));
  EXPECT_TRUE(det.match);
  EXPECT_EQ(det.f_cpu, sim.f_cpu);

  LeakageTrace noise;
  noise.sample_rate = sim.sample_rate;
  for (int i = 0; i < 200000; ++i) noise.samples.push_back(static_cast<float>(rng.normal()));
  EXPECT_FALSE(detect_schedule(noise, {sim.f_cpu, 1.4e6}, align_for(c, sim)).match);
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "noncelab/errors.hpp"
#include "noncelab/tracesim.hpp"

using namespace noncelab;

namespace {

ScalarTraceSpec spec_for(const char* curve, SwapKind kind = SwapKind::Plain) {
  return {&builtin_curve(curve), Multiplier::Ladder, SwapVariant{kind, {}}};
}

// Frequency (Hz) of the largest non-DC DFT bin.
double dominant_frequency(const std::vector<float>& x, double fs) {
  const size_t n = x.size();
  double best = 0, best_f = 0;
  for (size_t k = 1; k < n / 2; ++k) {
    double re = 0, im = 0;
    for (size_t i = 0; i < n; ++i) {
      const double a = 2 * M_PI * static_cast<double>(k * i % n) / static_cast<double>(n);
      re += x[i] * std::cos(a);
      im -= x[i] * std::sin(a);
    }
    const double mag = re * re + im * im;
    if (mag > best) best = mag, best_f = k * fs / static_cast<double>(n);
  }
  return best_f;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.sample_rate = 3.9 * c.f_mod();
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  c.interference.push_back({1.5, 0.5, 1});
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  c.noise_sigma = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Tracesim, DeterministicForFixedSeed) {
  const auto spec = spec_for("secp128r1");
  SimConfig sim;
  Rng a(5), b(5);
  const auto ta = simulate_scalar_mult(spec, 12345, spec.curve->generator(), sim, a);
  const auto tb = simulate_scalar_mult(spec, 12345, spec.curve->generator(), sim, b);
  EXPECT_EQ(ta.samples, tb.samples);
  EXPECT_EQ(ta.meta, tb.meta);
}

TEST(Tracesim, SilentEventsGiveCarrier) {
  std::vector<SwapTraceEvent> ev;
  for (uint64_t i = 0; i < 64; ++i) ev.push_back({OpKind::StoreA, 0, i, kCondUnknown});
  SimConfig sim;
  sim.noise_sigma = 0;
  Rng rng(1);
  const LeakageTrace t = synthesize(ev, sim, rng);
  const double f = dominant_frequency(t.samples, t.sample_rate);
  EXPECT_NEAR(f, sim.f_mod(), t.sample_rate / static_cast<double>(t.samples.size()));
}

TEST(Tracesim, SpectralPeakAtModulationFrequency) {
  const auto spec = spec_for("toy16");
  SimConfig sim;
  sim.noise_sigma = 0;
  Rng rng(2);
  const auto t = simulate_scalar_mult(spec, 1000, spec.curve->generator(), sim, rng);
  std::vector<float> head(t.samples.begin(), t.samples.begin() + std::min<size_t>(t.samples.size(), 8192));
  EXPECT_NEAR(dominant_frequency(head, t.sample_rate), sim.f_mod(), 2 * t.sample_rate / head.size());
}

TEST(Tracesim, JointClockScalingKeepsTrace) {
  const auto spec = spec_for("toy16");
  SimConfig a, b;
  b.f_cpu = 2 * a.f_cpu;
  b.mod_ratio = a.mod_ratio / 2;
  Rng ra(3), rb(3);
  const auto ta = simulate_scalar_mult(spec, 777, spec.curve->generator(), a, ra);
  const auto tb = simulate_scalar_mult(spec, 777, spec.curve->generator(), b, rb);
  ASSERT_EQ(ta.samples.size(), tb.samples.size());
  for (size_t i = 0; i < ta.samples.size(); ++i) ASSERT_NEAR(ta.samples[i], tb.samples[i], 1e-5);
}

TEST(Tracesim, MarkersMatchSwaps) {
  const auto spec = spec_for("secp128r1");
  SimConfig sim;
  Rng rng(4);
  const mpz_class k = rng.nonzero_below(spec.curve->order());
  const auto t = simulate_scalar_mult(spec, k, spec.curve->generator(), sim, rng);
  const auto swaps = t.of_kind(MarkerKind::Swap);
  ASSERT_EQ(swaps.size(), 128u);
  EXPECT_EQ(t.swap_conditions(), swap_conditions(Multiplier::Ladder, Scalar::for_curve(k, *spec.curve)));
  for (size_t i = 1; i < t.markers.size(); ++i) EXPECT_LE(t.markers[i - 1].start, t.markers[i].start);
  for (size_t i = 1; i < swaps.size(); ++i) EXPECT_LE(swaps[i - 1].end, swaps[i].start);
  for (const auto& m : t.markers) EXPECT_LE(m.end, t.samples.size());
}

TEST(Tracesim, InterferenceSpans) {
  const auto spec = spec_for("secp128r1");
  SimConfig sim;
  Rng r1(6), r2(6);
  const auto base = simulate_scalar_mult(spec, 999, spec.curve->generator(), sim, r1);
  Rng r3(7);
  const auto same = inject_interference(base, sim, r3);
  EXPECT_EQ(same.samples, base.samples);

  sim.interference.push_back({0.25, 0.25, 20});
  const auto hit = simulate_scalar_mult(spec, 999, spec.curve->generator(), sim, r2);
  const size_t n = hit.samples.size();
  for (const auto& m : hit.of_kind(MarkerKind::Swap)) {
    const bool overlaps = m.end > n / 4 && m.start < n / 2;
    EXPECT_EQ(m.interfered, overlaps) << m.index;
  }
}

TEST(Tracesim, TrainingSetLabels) {
  const auto spec = spec_for("toy16");
  SimConfig sim;
  Rng rng(8);
  const TraceSet set = generate_training_set(spec, 4, sim, rng);
  ASSERT_EQ(set.labels.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    ASSERT_EQ(set.labels[i].size(), spec.curve->order_bits());
    const int expect = i % 2 == 1;
    for (size_t j = 1; j < set.labels[i].size(); ++j) EXPECT_EQ(set.labels[i][j], expect) << i << ":" << j;
    EXPECT_EQ(set.labels[i], set.traces[i].swap_conditions());
  }
}

TEST(Tracesim, SwapSetBalance) {
  const auto spec = spec_for("secp128r1");
  SimConfig sim;
  Rng rng(9);
  const TraceSet set = generate_swap_set(spec, 5000, sim, rng);
  ASSERT_EQ(set.traces.size(), 10000u);
  size_t ones = 0;
  for (const auto& l : set.labels) {
    ASSERT_EQ(l.size(), 1u);
    ones += l[0];
  }
  EXPECT_EQ(ones, 5000u);
  size_t first_half = 0;
  for (size_t i = 0; i < 5000; ++i) first_half += set.labels[i][0];
  EXPECT_NEAR(first_half, 2500.0, 4 * std::sqrt(1250.0));  // shuffled, not blocked
}

TEST(Tracesim, InterruptionKeepsSwaps) {
  const auto spec = spec_for("toy16");
  SimConfig sim;
  sim.interruption_prob = 1;
  Rng rng(10);
  const auto t = simulate_scalar_mult(spec, 4321, spec.curve->generator(), sim, rng);
  EXPECT_EQ(t.of_kind(MarkerKind::Swap).size(), 16u);
  EXPECT_TRUE(t.meta.count("interruption"));
}

TEST(TraceIo, RoundTrip) {
  const auto spec = spec_for("toy16");
  SimConfig sim;
  Rng rng(11);
  std::vector<LeakageTrace> traces;
  for (int i = 0; i < 3; ++i) traces.push_back(simulate_scalar_mult(spec, 100 + i, spec.curve->generator(), sim, rng));
  const auto dir = std::filesystem::temp_directory_path() / "noncelab_trace_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "t.sctr").string();
  write_traces(path, traces, {{"seed", "11"}});
  std::map<std::string, std::string> meta;
  auto back = read_traces(path, &meta);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(meta.at("seed"), "11");
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].samples, traces[i].samples);
    EXPECT_EQ(back[i].sample_rate, traces[i].sample_rate);
  }
  write_markers_csv((dir / "m.csv").string(), traces);
  write_labels_csv((dir / "l.csv").string(), traces);
  read_swap_markers((dir / "m.csv").string(), (dir / "l.csv").string(), back);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].swap_conditions(), traces[i].swap_conditions());
    const auto a = back[i].of_kind(MarkerKind::Swap), b = traces[i].of_kind(MarkerKind::Swap);
    ASSERT_EQ(a.size(), b.size());
    for (size_t j = 0; j < a.size(); ++j) EXPECT_EQ(a[j].start, b[j].start);
  }
  {
    std::ofstream bad(path, std::ios::binary);
    bad << "NOPE";
  }
  EXPECT_THROW(read_traces(path), FormatError);
}

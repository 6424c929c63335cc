#include <benchmark/benchmark.h>

#include "noncelab/experiment.hpp"

using namespace noncelab;

namespace {

mpz_class pow2(size_t e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), 2, e);
  return v;
}

const CurveParams& curve_arg(const benchmark::State& state) {
  static const char* names[] = {"secp128r1", "wei25519", "secp521r1"};
  return builtin_curve(names[state.range(0)]);
}

void BM_FieldMul(benchmark::State& state) {
  const auto& c = curve_arg(state);
  Rng rng(1);
  FieldElement a = c.fe(rng.below(c.p())), b = c.fe(rng.below(c.p()));
  for (auto _ : state) {
    a = a * b;
    benchmark::DoNotOptimize(a);
  }
  state.SetLabel(c.name());
}
BENCHMARK(BM_FieldMul)->DenseRange(0, 2);

void BM_Ladder(benchmark::State& state) {
  const auto& c = curve_arg(state);
  Rng rng(2);
  const Scalar k = Scalar::for_curve(rng.nonzero_below(c.order()), c);
  for (auto _ : state) benchmark::DoNotOptimize(montgomery_ladder(k, c.generator(), c));
  state.SetLabel(c.name());
}
BENCHMARK(BM_Ladder)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_SimulateTrace(benchmark::State& state) {
  const auto& c = curve_arg(state);
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
  const SimConfig sim;
  Rng rng(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng));
  state.SetLabel(c.name());
}
BENCHMARK(BM_SimulateTrace)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_AlignSwaps(benchmark::State& state) {
  const auto& c = curve_arg(state);
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
  const SimConfig sim;
  Rng rng(4);
  const LeakageTrace t = simulate_scalar_mult(spec, rng.nonzero_below(c.order()), c.generator(), sim, rng);
  const AlignConfig ac = align_config(spec, sim);
  for (auto _ : state) benchmark::DoNotOptimize(align_swaps(t, ac));
  state.SetLabel(c.name());
}
BENCHMARK(BM_AlignSwaps)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_WelchT(benchmark::State& state) {
  const auto& c = builtin_curve("secp521r1");
  const ScalarTraceSpec spec{&c, Multiplier::Ladder, {}};
  Rng rng(5);
  const TraceSet set = generate_swap_set(spec, static_cast<size_t>(state.range(0)), SimConfig{}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(welch_t(set));
}
BENCHMARK(BM_WelchT)->Arg(1000)->Unit(benchmark::kMillisecond);

// HNP lattice for secp521r1 with m signatures of l known bits.
void BM_LllHnp(benchmark::State& state) {
  const auto& c = builtin_curve("secp521r1");
  const size_t l = static_cast<size_t>(state.range(0)), m = static_cast<size_t>(state.range(1));
  Rng rng(6);
  const KeyPair key = keygen(c, rng);
  SignOptions so;
  so.lab_mode = true;
  std::vector<LeakRecord> records;
  for (size_t i = 0; i < m; ++i) {
    const SignResult r = sign(rng.below(c.order()), key, c, rng, so);
    records.push_back({r.signature, r.nonce->k.value % pow2(l), l, {}});
  }
  const LatticeBasis B = build_lattice(build_hnp(records, c));
  for (auto _ : state) benchmark::DoNotOptimize(lll_reduce(B));
  state.SetLabel("l=" + std::to_string(l) + " m=" + std::to_string(m));
}
BENCHMARK(BM_LllHnp)->Args({300, 2})->Args({100, 7})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

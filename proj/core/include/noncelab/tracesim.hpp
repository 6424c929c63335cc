#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "noncelab/curve.hpp"
#include "noncelab/events.hpp"
#include "noncelab/rng.hpp"
#include "noncelab/scalar_mult.hpp"
#include "noncelab/swap.hpp"

namespace noncelab {

struct InterferenceSpec {
  double start_fraction = 0;
  double length_fraction = 0;
  double amplitude = 0;
};

/// Simulator parameters. Defaults are the desk-scale profile: a 1.8 MHz
/// surrogate clock sampled at 2.5 MS/s (hardware frequencies / 1000).
struct SimConfig {
  double f_cpu = 1.8e6;
  double mod_ratio = 1.0 / 14.0;
  double sample_rate = 2.5e6;
  uint32_t samples_per_event = 96;
  double noise_sigma = 1.0;
  double snr_scale = 1.0;
  double baseline = 0.2;
  double arith_floor = 1.0;   // multiply/square activity level
  double addsub_floor = 0.3;  // add/sub/shift activity level
  double arith_gain = 0.05;   // operand dependence of arithmetic events
  uint32_t pad = 192;         // idle samples before and after the operation
  std::vector<InterferenceSpec> interference;
  double interruption_prob = 0;
  uint32_t interruption_min = 192;
  uint32_t interruption_max = 1536;
  bool event_markers = true;
  uint64_t seed = 1;

  double f_mod() const { return f_cpu * mod_ratio; }
  /// Throws ConfigError on Nyquist violation or malformed fields.
  void validate() const;
};

/// Hardware-scale profile, for documentation (768 MHz core, 2.5 GS/s).
SimConfig hardware_profile();

enum class MarkerKind : uint8_t { Swap, Step, Event };

struct TraceMarker {
  MarkerKind kind;
  size_t start;  // sample index
  size_t end;    // exclusive
  OpKind op;     // meaningful for Event markers
  int8_t cond;   // swap condition, kCondUnknown otherwise
  uint32_t index;
  bool interfered = false;
};

struct LeakageTrace {
  std::vector<float> samples;
  double sample_rate = 0;
  std::vector<TraceMarker> markers;  // sorted by start
  std::map<std::string, std::string> meta;

  std::vector<TraceMarker> of_kind(MarkerKind kind) const;
  std::vector<int> swap_conditions() const;
};

struct TraceSet {
  std::vector<LeakageTrace> traces;
  std::vector<std::vector<int>> labels;  // [trace][swap]
};

/// Sample durations of one event.
uint32_t event_duration(OpKind op, const SimConfig& cfg);

/// samples(t) = [baseline + g(t)] cos(2 pi f_mod t) + N(0, sigma). g is a
/// Hann pulse for multiply/square events and a flat level for everything
/// else; its height is a fixed activity floor plus a term proportional to
/// the event's leak value. Segment markers follow the recorder's segments.
LeakageTrace synthesize(const EventRecorder& rec, const SimConfig& cfg, Rng& rng);
LeakageTrace synthesize(std::span<const SwapTraceEvent> events, const SimConfig& cfg, Rng& rng);

/// Adds band-limited noise bursts centred on f_mod over the configured
/// spans and flags every overlapping marker as interfered.
LeakageTrace inject_interference(LeakageTrace trace, const SimConfig& cfg, Rng& rng);

/// Profiling nonces: every recorded swap condition is 1 (swap) or all but
/// the first are 0 (no swap; the first is fixed by the leading one bit).
mpz_class training_nonce(Multiplier m, size_t bits, bool swap);

struct ScalarTraceSpec {
  const CurveParams* curve;
  Multiplier multiplier = Multiplier::Ladder;
  SwapVariant variant;
};

/// Full scalar multiplication trace for nonce k on base P.
LeakageTrace simulate_scalar_mult(const ScalarTraceSpec& spec, const mpz_class& k,
                                  const AffinePoint& P, const SimConfig& cfg, Rng& rng);

/// Traces of full scalar multiplications with profiling nonces on random
/// base points; even-indexed traces use the no-swap nonce, odd ones swap.
TraceSet generate_training_set(const ScalarTraceSpec& spec, size_t count, const SimConfig& cfg,
                               Rng& rng, unsigned jobs = 1);

/// Isolated conditional swaps on random ladder-like operands, padded on both
/// sides; count_per_class traces of each condition in random order. The
/// label matrix has one column.
TraceSet generate_swap_set(const ScalarTraceSpec& spec, size_t count_per_class,
                           const SimConfig& cfg, Rng& rng, unsigned jobs = 1);

/// Nominal sample lengths of one multiplier step and one swap.
size_t step_samples(const CurveParams& curve, Multiplier m, const SimConfig& cfg);
size_t swap_samples(const CurveParams& curve, SwapKind kind, const SimConfig& cfg);

/// Events of one noiseless step on random operands (the alignment template).
EventRecorder reference_step(const CurveParams& curve, Multiplier m, Rng& rng);

// SCTR binary trace container plus CSV sidecars.
void write_traces(const std::string& path, const std::vector<LeakageTrace>& traces,
                  const std::map<std::string, std::string>& meta = {});
std::vector<LeakageTrace> read_traces(const std::string& path,
                                      std::map<std::string, std::string>* meta = nullptr);
/// trace_index,swap_index,cond,interfered
void write_labels_csv(const std::string& path, const std::vector<LeakageTrace>& traces);
/// trace_index,swap_index,start,end
void write_markers_csv(const std::string& path, const std::vector<LeakageTrace>& traces);
/// Restores swap markers (and conditions when a labels file is given).
void read_swap_markers(const std::string& markers_path, const std::string& labels_path,
                       std::vector<LeakageTrace>& traces);

}  // namespace noncelab

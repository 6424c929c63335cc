#pragma once

#include <span>
#include <string>
#include <vector>

#include "noncelab/curve.hpp"
#include "noncelab/scalar_mult.hpp"
#include "noncelab/tracesim.hpp"

namespace noncelab {

struct FilterSpec {
  enum class Kind { Bandpass };
  double center = 0;
  double bandwidth = 0;
  Kind kind = Kind::Bandpass;

  /// Throws ConfigError unless 0 < center - bw/2 and center + bw/2 < fs/2.
  void validate(double sample_rate) const;
};

/// Linear-phase FIR band-pass (Blackman-windowed sinc). The passband is
/// center +- bandwidth/2, the stopband starts at center +- bandwidth. The
/// output is shifted back by the filter's group delay, so sample i of the
/// output lines up with sample i of the input.
std::vector<double> bandpass(std::span<const double> x, double sample_rate, const FilterSpec& spec);
std::vector<double> bandpass(std::span<const float> x, double sample_rate, const FilterSpec& spec);
/// Group delay (in samples) that bandpass() compensates.
size_t bandpass_delay(double sample_rate, const FilterSpec& spec);
size_t bandpass_taps(double sample_rate, const FilterSpec& spec);

/// Sliding-median window used by the envelope chain when none is given
/// (about two periods of the desk-scale carrier).
constexpr double kDefaultMedianSeconds = 16e-6;

/// |x| followed by a centred sliding median over round(window * fs) samples
/// (made odd), reflect-padded at both ends. Throws ConfigError if the window
/// is shorter than 3 samples or longer than the input.
std::vector<double> rectify_median(std::span<const double> x, double sample_rate, double window_seconds);
std::vector<double> sliding_median(std::span<const double> x, size_t window);

/// Magnitude STFT: rows are frames (floor((N - window) / hop) + 1), columns
/// frequency bins (window / 2 + 1). Rectangular window unless hann is set.
struct StftGrid {
  size_t frames = 0;
  size_t bins = 0;
  size_t window = 0;
  size_t hop = 0;
  std::vector<double> magnitude;  // frames * bins, row-major

  double at(size_t frame, size_t bin) const { return magnitude[frame * bins + bin]; }
};
StftGrid stft(std::span<const double> x, size_t window, size_t hop, bool hann = false);

/// Amplitude envelope by I/Q mixing with the carrier and a low-pass of the
/// given cutoff (delay-compensated).
std::vector<double> demodulate(std::span<const float> x, double sample_rate, double carrier, double cutoff);

/// Band-pass around f_mod, rectification and sliding median: the envelope
/// in which multiplications appear as separate peaks.
std::vector<double> activity_envelope(std::span<const float> x, double sample_rate, double f_mod,
                                      double median_seconds = kDefaultMedianSeconds);

/// Groups of envelope peaks: a peak is a local maximum above rel_height of
/// the global maximum; consecutive peaks closer than max_gap share a group.
std::vector<std::vector<size_t>> peak_groups(std::span<const double> env, size_t min_distance,
                                             size_t max_gap, double rel_height = 0.65);

struct AlignConfig {
  const CurveParams* curve = nullptr;
  Multiplier multiplier = Multiplier::Ladder;
  SwapKind variant = SwapKind::Plain;
  SimConfig sim;
  /// Normalised cross-correlation the best-matching step must reach. The
  /// other steps are tracked at the step period from there.
  double threshold = 0.4;
  /// Steps to report; 0 means the curve's order bit length. Missing steps
  /// are filled in at the nominal period, surplus low-score ones dropped.
  size_t expected_steps = 0;
  size_t decimation = 8;
  double median_seconds = kDefaultMedianSeconds;
  /// Extra samples on both sides of each swap window.
  size_t window_margin = 24;
};

struct SwapWindow {
  size_t start;
  size_t end;  // exclusive
  double confidence;  // NCC of the adjacent step; 0 when filled in
  bool filled;
};

struct AlignedSwapWindows {
  std::vector<SwapWindow> windows;
  std::vector<size_t> step_positions;  // detected step starts
  std::vector<double> step_scores;
  /// Envelope peak-group sizes inside the first detected step.
  std::vector<size_t> first_step_pattern;
};

/// Finds multiplier steps by matched filtering a demodulated envelope with
/// a synthesised noiseless step and derives one swap window per step.
/// Throws AlignmentError when no step reaches the threshold.
AlignedSwapWindows align_swaps(const LeakageTrace& trace, const AlignConfig& cfg);

/// Width of the windows align_swaps produces.
size_t swap_window_width(const AlignConfig& cfg);

struct ScheduleDetection {
  double f_cpu = 0;
  bool match = false;
  double score = 0;
  std::vector<double> scores;  // per candidate
};

/// Picks the candidate clock whose modulated band carries the strongest
/// step pattern; match is false when no candidate reaches cfg.threshold.
ScheduleDetection detect_schedule(const LeakageTrace& trace, const std::vector<double>& known_frequencies,
                                  const AlignConfig& cfg);

// Plot-ready CSV exports.
void write_envelope_csv(const std::string& path, std::span<const double> env, double sample_rate);
void write_stft_csv(const std::string& path, const StftGrid& grid, double sample_rate);
void write_windows_csv(const std::string& path, const AlignedSwapWindows& w);

}  // namespace noncelab

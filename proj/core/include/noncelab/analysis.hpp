#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "noncelab/dsp.hpp"
#include "noncelab/scalar_mult.hpp"
#include "noncelab/tracesim.hpp"

namespace noncelab {

/// Rows of equal length, one per trace or window.
using FeatureMatrix = std::vector<std::vector<double>>;

constexpr double kTvlaThreshold = 4.5;

struct TTestResult {
  std::vector<double> t_values;
  size_t n0 = 0;
  size_t n1 = 0;
  double max_abs_t = 0;

  bool leaks(double threshold = kTvlaThreshold) const { return max_abs_t > threshold; }
};

/// Streaming per-class mean/variance (Welford). Accumulators over disjoint
/// row sets can be merged, so fitting splits across workers.
class ClassMoments {
 public:
  explicit ClassMoments(size_t width = 0);

  void add(std::span<const double> row, int label);
  void merge(const ClassMoments& other);

  size_t width() const { return width_; }
  size_t count(int label) const { return n_[label != 0]; }
  const std::vector<double>& mean(int label) const { return mean_[label != 0]; }
  /// Unbiased sample variance per column.
  std::vector<double> variance(int label) const;
  /// Mean of |x| over every row seen.
  double mean_abs() const;

 private:
  size_t width_;
  size_t n_[2] = {0, 0};
  std::vector<double> mean_[2];
  std::vector<double> m2_[2];
  double abs_sum_ = 0;
};

/// Per-column Welch t statistic of class 1 against class 0. Throws StatError
/// when a class has fewer than two rows or the rows differ in length.
TTestResult welch_t(const FeatureMatrix& rows, std::span<const int> labels);
TTestResult welch_t(const ClassMoments& moments);
/// Raw-sample t-test over isolated swap traces (one label per trace).
TTestResult welch_t(const TraceSet& set);

/// Indices of the `count` largest |t|, by descending |t|, ties to the lower
/// index. Throws ConfigError if count exceeds the number of samples.
std::vector<size_t> select_poi(const TTestResult& t, size_t count);

struct TemplateModel {
  std::vector<uint32_t> poi;  // sorted
  std::vector<double> mean0;
  std::vector<double> mean1;
  /// Pooled covariance: |poi| entries when diagonal, |poi|^2 row-major
  /// otherwise.
  std::vector<double> pooled_cov;
  bool full_covariance = false;
  std::map<std::string, std::string> trained_on;

  size_t dim() const { return poi.size(); }
};

struct TemplateOptions {
  bool full_covariance = false;
  /// Ridge added to the covariance diagonal, relative to the mean |x|.
  double ridge = 1e-6;
};

/// Class means and pooled covariance over the poi columns. Full mode needs
/// at least 10 |poi| rows per class. Throws StatError on degenerate classes
/// or a covariance that stays singular after the ridge.
TemplateModel fit_templates(const FeatureMatrix& rows, std::span<const int> labels,
                            std::span<const size_t> poi, const TemplateOptions& opt = {});
TemplateModel fit_templates(const ClassMoments& moments, std::span<const size_t> poi,
                            const TemplateOptions& opt = {});

struct BitPrediction {
  int cond_guess = 0;
  double probability = 0.5;  // normalised class-1 likelihood

  double confidence() const { return cond_guess ? probability : 1 - probability; }
};

/// Gaussian log-likelihood ratio; a tie decides 0. Throws ConfigError when
/// the window does not cover every poi.
BitPrediction classify(const TemplateModel& model, std::span<const double> window);

// SCTM binary container: magic, version, flags, poi, means and covariance
// as little-endian f64, then key=value metadata.
void write_model(const std::string& path, const TemplateModel& model);
TemplateModel read_model(const std::string& path);
void write_model(std::ostream& out, const TemplateModel& model);
TemplateModel read_model(std::istream& in);

void write_tcurve_csv(const std::string& path, const TTestResult& t);

/// Demodulated activity envelope cut into the given windows. Every window
/// must lie inside the trace.
FeatureMatrix window_features(const LeakageTrace& trace, std::span<const SwapWindow> windows, double f_mod);

struct NonceBits {
  std::string bits;  // MSB first, '0'/'1'
  std::vector<double> probability;  // per bit, that the bit is 1
  std::vector<BitPrediction> conditions;  // per swap, recording order

  /// Value of the bits as an integer.
  mpz_class value() const;
  /// Number of low-order bits in which this and k agree contiguously from
  /// the least significant end.
  size_t matching_lsbs(const mpz_class& k) const;
};

/// Classifies each window and turns the swap conditions into nonce bits:
/// ladder conditions are k_i xor k_{i+1} with k_b = 0, double-and-always-add
/// conditions are the bits themselves.
NonceBits recover_nonce_bits(const LeakageTrace& trace, const TemplateModel& model,
                             const AlignedSwapWindows& windows, Multiplier m, double f_mod);
NonceBits bits_from_conditions(std::span<const BitPrediction> conds, Multiplier m);

}  // namespace noncelab

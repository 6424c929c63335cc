#include "noncelab/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "fft.hpp"
#include "noncelab/errors.hpp"

namespace noncelab {

namespace detail {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftBuffers {
  size_t n;
  double* real;
  fftw_complex* spec;
  fftw_plan fwd;
  fftw_plan inv;

  explicit FftBuffers(size_t size) : n(size) {
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(plan_mutex());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
  }
  ~FftBuffers() {
    {
      std::lock_guard<std::mutex> lock(plan_mutex());
      fftw_destroy_plan(fwd);
      fftw_destroy_plan(inv);
    }
    fftw_free(real);
    fftw_free(spec);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

}  // namespace

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const size_t m = x.size() + h.size() - 1;
  if (std::min(x.size(), h.size()) <= 32) {
    std::vector<double> out(m, 0.0);
    for (size_t i = 0; i < x.size(); ++i)
      for (size_t j = 0; j < h.size(); ++j) out[i + j] += x[i] * h[j];
    return out;
  }
  const size_t n = next_pow2(m);
  FftBuffers a(n);
  std::vector<std::complex<double>> hs(n / 2 + 1);
  std::fill(a.real, a.real + n, 0.0);
  std::copy(h.begin(), h.end(), a.real);
  fftw_execute_dft_r2c(a.fwd, a.real, a.spec);
  for (size_t k = 0; k <= n / 2; ++k) hs[k] = {a.spec[k][0], a.spec[k][1]};
  std::fill(a.real, a.real + n, 0.0);
  std::copy(x.begin(), x.end(), a.real);
  fftw_execute_dft_r2c(a.fwd, a.real, a.spec);
  for (size_t k = 0; k <= n / 2; ++k) {
    const std::complex<double> v = std::complex<double>(a.spec[k][0], a.spec[k][1]) * hs[k];
    a.spec[k][0] = v.real();
    a.spec[k][1] = v.imag();
  }
  fftw_execute_dft_c2r(a.inv, a.spec, a.real);
  std::vector<double> out(m);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < m; ++i) out[i] = a.real[i] * scale;
  return out;
}

std::vector<double> filter_same(std::span<const double> x, std::span<const double> h) {
  const size_t delay = (h.size() - 1) / 2;
  std::vector<double> full = convolve(x, h);
  return std::vector<double>(full.begin() + static_cast<ptrdiff_t>(delay),
                             full.begin() + static_cast<ptrdiff_t>(delay + x.size()));
}

size_t blackman_taps(double fs, double transition) {
  size_t taps = static_cast<size_t>(std::ceil(5.5 * fs / transition));
  if (taps % 2 == 0) ++taps;
  return std::max<size_t>(taps, 3);
}

std::vector<double> lowpass_kernel(double fs, double fc, size_t taps) {
  std::vector<double> h(taps);
  const double M = static_cast<double>(taps - 1);
  const double wc = 2 * fc / fs;
  double sum = 0;
  for (size_t i = 0; i < taps; ++i) {
    const double n = static_cast<double>(i) - M / 2;
    const double sinc = n == 0 ? wc : std::sin(std::numbers::pi * wc * n) / (std::numbers::pi * n);
    const double w = 0.42 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) / M) +
                     0.08 * std::cos(4 * std::numbers::pi * static_cast<double>(i) / M);
    h[i] = sinc * w;
    sum += h[i];
  }
  if (fc > 0)
    for (auto& v : h) v /= sum;
  return h;
}

}  // namespace detail

void FilterSpec::validate(double fs) const {
  if (!(center > 0) || !(bandwidth > 0)) throw ConfigError("filter center and bandwidth must be positive");
  if (center - bandwidth / 2 <= 0) throw ConfigError("filter passband reaches DC");
  if (center + bandwidth / 2 >= fs / 2) throw ConfigError("filter passband exceeds Nyquist");
}

size_t bandpass_taps(double fs, const FilterSpec& spec) {
  spec.validate(fs);
  return detail::blackman_taps(fs, spec.bandwidth / 2);
}

size_t bandpass_delay(double fs, const FilterSpec& spec) { return (bandpass_taps(fs, spec) - 1) / 2; }

namespace {

std::vector<double> bandpass_kernel(double fs, const FilterSpec& spec) {
  const size_t taps = bandpass_taps(fs, spec);
  const double lo = spec.center - 0.75 * spec.bandwidth;
  const double hi = std::min(spec.center + 0.75 * spec.bandwidth, fs / 2);
  std::vector<double> h = detail::lowpass_kernel(fs, hi, taps);
  if (lo > 0) {
    const std::vector<double> l = detail::lowpass_kernel(fs, lo, taps);
    for (size_t i = 0; i < taps; ++i) h[i] -= l[i];
  }
  // unit gain at the centre frequency
  std::complex<double> H = 0;
  const double w = 2 * std::numbers::pi * spec.center / fs;
  for (size_t i = 0; i < taps; ++i) H += h[i] * std::polar(1.0, -w * static_cast<double>(i));
  const double g = std::abs(H);
  for (auto& v : h) v /= g;
  return h;
}

}  // namespace

std::vector<double> bandpass(std::span<const double> x, double fs, const FilterSpec& spec) {
  const std::vector<double> h = bandpass_kernel(fs, spec);
  return detail::filter_same(x, h);
}

std::vector<double> bandpass(std::span<const float> x, double fs, const FilterSpec& spec) {
  const std::vector<double> d(x.begin(), x.end());
  return bandpass(std::span<const double>(d), fs, spec);
}

std::vector<double> sliding_median(std::span<const double> x, size_t w) {
  if (w < 3) throw ConfigError("median window must be at least 3 samples");
  if (w % 2 == 0) ++w;
  const size_t n = x.size();
  if (w > n) throw ConfigError("median window longer than the signal");
  const ptrdiff_t half = static_cast<ptrdiff_t>(w / 2);
  auto at = [&](ptrdiff_t i) {
    const ptrdiff_t N = static_cast<ptrdiff_t>(n);
    if (i < 0) i = -i;
    if (i >= N) i = 2 * (N - 1) - i;
    return x[static_cast<size_t>(std::clamp<ptrdiff_t>(i, 0, N - 1))];
  };
  std::vector<double> win;
  win.reserve(w);
  for (ptrdiff_t i = -half; i <= half; ++i) win.push_back(at(i));
  std::sort(win.begin(), win.end());
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = win[w / 2];
    if (i + 1 == n) break;
    const double leaving = at(static_cast<ptrdiff_t>(i) - half);
    const double entering = at(static_cast<ptrdiff_t>(i) + half + 1);
    win.erase(std::lower_bound(win.begin(), win.end(), leaving));
    win.insert(std::upper_bound(win.begin(), win.end(), entering), entering);
  }
  return out;
}

std::vector<double> rectify_median(std::span<const double> x, double fs, double window_seconds) {
  const auto w = static_cast<size_t>(std::llround(window_seconds * fs));
  if (w < 3) throw ConfigError("median window must span at least 3 samples");
  if (w > x.size()) throw ConfigError("median window longer than the signal");
  std::vector<double> a(x.size());
  for (size_t i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
  return sliding_median(a, w);
}

StftGrid stft(std::span<const double> x, size_t window, size_t hop, bool hann) {
  if (window < 8) throw ConfigError("STFT window must be at least 8 samples");
  if (hop < 1) throw ConfigError("STFT hop must be positive");
  if (x.size() < window) throw ConfigError("signal shorter than the STFT window");
  StftGrid g;
  g.window = window;
  g.hop = hop;
  g.frames = (x.size() - window) / hop + 1;
  g.bins = window / 2 + 1;
  g.magnitude.resize(g.frames * g.bins);
  std::vector<double> win(window, 1.0);
  if (hann)
    for (size_t i = 0; i < window; ++i)
      win[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(window));
  double* in = fftw_alloc_real(window);
  fftw_complex* out = fftw_alloc_complex(g.bins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(detail::plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(window), in, out, FFTW_ESTIMATE);
  }
  for (size_t f = 0; f < g.frames; ++f) {
    for (size_t i = 0; i < window; ++i) in[i] = x[f * hop + i] * win[i];
    fftw_execute(plan);
    for (size_t k = 0; k < g.bins; ++k) g.magnitude[f * g.bins + k] = std::hypot(out[k][0], out[k][1]);
  }
  {
    std::lock_guard<std::mutex> lock(detail::plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return g;
}

std::vector<double> demodulate(std::span<const float> x, double fs, double carrier, double cutoff) {
  if (!(carrier > 0) || carrier >= fs / 2) throw ConfigError("carrier outside (0, fs/2)");
  if (!(cutoff > 0) || cutoff >= fs / 2) throw ConfigError("cutoff outside (0, fs/2)");
  const size_t n = x.size();
  std::vector<double> i(n), q(n);
  const double w = 2 * std::numbers::pi * carrier / fs;
  for (size_t t = 0; t < n; ++t) {
    i[t] = x[t] * std::cos(w * static_cast<double>(t));
    q[t] = -x[t] * std::sin(w * static_cast<double>(t));
  }
  const std::vector<double> h = detail::lowpass_kernel(fs, cutoff, detail::blackman_taps(fs, cutoff));
  const std::vector<double> fi = detail::filter_same(i, h);
  const std::vector<double> fq = detail::filter_same(q, h);
  std::vector<double> env(n);
  for (size_t t = 0; t < n; ++t) env[t] = 2 * std::hypot(fi[t], fq[t]);
  return env;
}

std::vector<double> activity_envelope(std::span<const float> x, double fs, double f_mod, double median_seconds) {
  const std::vector<double> bp = bandpass(x, fs, FilterSpec{f_mod, f_mod});
  return rectify_median(bp, fs, median_seconds);
}

std::vector<std::vector<size_t>> peak_groups(std::span<const double> env, size_t min_distance, size_t max_gap,
                                             double rel_height) {
  std::vector<std::vector<size_t>> groups;
  if (env.empty()) return groups;
  const double thr = rel_height * *std::max_element(env.begin(), env.end());
  const size_t n = env.size();
  std::vector<size_t> peaks;
  // Interior points only: a rising edge cut off by the span end is no peak.
  for (size_t i = min_distance; i + min_distance < n; ++i) {
    if (env[i] <= thr) continue;
    const size_t lo = i - min_distance;
    const size_t hi = i + min_distance;
    bool is_max = true;
    for (size_t j = lo; j <= hi && is_max; ++j)
      if (env[j] > env[i] || (env[j] == env[i] && j < i)) is_max = false;
    if (is_max) peaks.push_back(i);
  }
  for (size_t p : peaks) {
    if (groups.empty() || p - groups.back().back() > max_gap) groups.emplace_back();
    groups.back().push_back(p);
  }
  return groups;
}

void write_envelope_csv(const std::string& path, std::span<const double> env, double fs) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(9);
  out << "sample,time_s,value\n";
  for (size_t i = 0; i < env.size(); ++i) out << i << ',' << static_cast<double>(i) / fs << ',' << env[i] << '\n';
}

void write_stft_csv(const std::string& path, const StftGrid& g, double fs) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(9);
  out << "frame,time_s,frequency_hz,magnitude\n";
  for (size_t f = 0; f < g.frames; ++f)
    for (size_t k = 0; k < g.bins; ++k)
      out << f << ',' << static_cast<double>(f * g.hop) / fs << ','
          << static_cast<double>(k) * fs / static_cast<double>(g.window) << ',' << g.at(f, k) << '\n';
}

void write_windows_csv(const std::string& path, const AlignedSwapWindows& w) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(6);
  out << "swap_index,start,end,confidence,filled\n";
  for (size_t i = 0; i < w.windows.size(); ++i)
    out << i << ',' << w.windows[i].start << ',' << w.windows[i].end << ',' << w.windows[i].confidence << ','
        << (w.windows[i].filled ? 1 : 0) << '\n';
}

}  // namespace noncelab

#pragma once

#include <span>
#include <vector>

namespace noncelab::detail {

/// Full linear convolution (length |x| + |h| - 1) through FFTW.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

/// Convolution with an odd-length linear-phase kernel, shifted by its group
/// delay and cut to |x| samples.
std::vector<double> filter_same(std::span<const double> x, std::span<const double> h);

/// Blackman-windowed sinc low-pass with cutoff fc (Hz), unit DC gain.
std::vector<double> lowpass_kernel(double fs, double fc, size_t taps);

/// Odd tap count for a Blackman design with the given transition width.
size_t blackman_taps(double fs, double transition);

}  // namespace noncelab::detail

#include "neosleep/filtering.hpp"

#include "fft_utils.hpp"
#include "neosleep/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

namespace neosleep {

namespace {

// Ideal lowpass impulse response at offset m from the center tap.
double sinc_lowpass(double cutoff_hz, double fs, long m) {
  if (m == 0) return 2.0 * cutoff_hz / fs;
  const double x = std::numbers::pi * static_cast<double>(m);
  return std::sin(2.0 * cutoff_hz / fs * x) / x;
}

// Reflect an index into [0, n-1] without repeating the edge sample.
std::size_t reflect_index(long long j, long long n) {
  if (n == 1) return 0;
  const long long period = 2 * (n - 1);
  long long m = j % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return static_cast<std::size_t>(m);
}

} // namespace

FirFilter design_bandpass(double fs, double low_hz, double high_hz,
                          int n_taps) {
  if (n_taps < 3 || n_taps % 2 == 0)
    throw ParameterError("n_taps must be odd and >= 3");
  if (!(fs > 0.0)) throw ParameterError("fs must be positive");
  if (!(0.0 < low_hz && low_hz < high_hz && high_hz < fs / 2.0))
    throw ParameterError("cutoffs must satisfy 0 < low < high < fs/2");

  FirFilter filter;
  filter.fs = fs;
  filter.low_hz = low_hz;
  filter.high_hz = high_hz;
  filter.taps.resize(static_cast<std::size_t>(n_taps));

  // Both the truncated ideal response and the Hamming window are symmetric
  // about the center tap, so compute one half and mirror it; evaluating the
  // window at k and n-1-k independently would differ in the last bit.
  const long center = (n_taps - 1) / 2;
  for (int k = 0; k <= center; ++k) {
    const long m = k - center;
    const double ideal =
        sinc_lowpass(high_hz, fs, m) - sinc_lowpass(low_hz, fs, m);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / (n_taps - 1));
    const double tap = ideal * hamming;
    filter.taps[static_cast<std::size_t>(k)] = tap;
    filter.taps[static_cast<std::size_t>(n_taps - 1 - k)] = tap;
  }
  return filter;
}

double frequency_response(const FirFilter& filter, double freq_hz) {
  if (filter.taps.empty()) throw ParameterError("filter has no taps");
  if (!(freq_hz >= 0.0 && freq_hz <= filter.fs / 2.0))
    throw ParameterError("frequency outside [0, fs/2]");

  const double w = 2.0 * std::numbers::pi * freq_hz / filter.fs;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < filter.taps.size(); ++k) {
    re += filter.taps[k] * std::cos(w * static_cast<double>(k));
    im -= filter.taps[k] * std::sin(w * static_cast<double>(k));
  }
  return std::hypot(re, im);
}

std::vector<double> apply(const FirFilter& filter,
                          const std::vector<double>& signal) {
  if (filter.taps.empty()) throw ParameterError("filter has no taps");
  if (signal.empty()) throw ParameterError("signal must be non-empty");

  const std::size_t n = signal.size();
  const std::size_t delay = filter.group_delay();
  if (delay == 0) {
    // Single-tap filter: plain scaling.
    std::vector<double> out(signal);
    for (double& v : out) v *= filter.taps[0];
    return out;
  }

  const auto nn = static_cast<long long>(n);
  std::vector<double> padded(n + 2 * delay);
  for (std::size_t i = 0; i < padded.size(); ++i) {
    const long long j =
        static_cast<long long>(i) - static_cast<long long>(delay);
    padded[i] = signal[reflect_index(j, nn)];
  }

  const std::vector<double> conv = detail::fft_convolve(padded, filter.taps);
  // Group delay plus the prepended reflection both offset by `delay`.
  return std::vector<double>(conv.begin() + 2 * delay,
                             conv.begin() + 2 * delay + n);
}

void dump_taps(const FirFilter& filter, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  char buf[64];
  for (double t : filter.taps) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), t);
    out.write(buf, res.ptr - buf);
    out.put('\n');
  }
}

} // namespace neosleep

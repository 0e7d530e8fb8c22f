#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace neosleep {

/// Linear-phase FIR bandpass filter. Coefficients are symmetric about the
/// center tap; 0 < low_hz < high_hz < fs/2.
struct FirFilter {
  std::vector<double> taps;
  double fs = 0.0;
  double low_hz = 0.0;
  double high_hz = 0.0;

  std::size_t group_delay() const { return (taps.size() - 1) / 2; }
};

/// Windowed-sinc bandpass design: difference of two ideal lowpass responses
/// under a Hamming window. Half-amplitude points land near low_hz/high_hz.
/// n_taps must be odd and >= 3.
FirFilter design_bandpass(double fs, double low_hz, double high_hz,
                          int n_taps);

/// Magnitude of the filter's frequency response at freq_hz, evaluated
/// directly from the coefficients: |sum_k h[k] * exp(-i 2 pi f k / fs)|.
double frequency_response(const FirFilter& filter, double freq_hz);

/// Convolve with reflection padding at both ends and compensate the group
/// delay of (n_taps-1)/2 samples, so the output has the input's length and
/// is time-aligned with it.
std::vector<double> apply(const FirFilter& filter,
                          const std::vector<double>& signal);

/// One coefficient per line, for external inspection.
void dump_taps(const FirFilter& filter, const std::string& path);

} // namespace neosleep

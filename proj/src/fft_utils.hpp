#pragma once

#include <span>
#include <vector>

namespace neosleep::detail {

/// One-sided power spectrum |X_k|^2 for k = 0..floor(n/2), exact length
/// (no zero padding).
std::vector<double> power_spectrum(std::span<const double> x);

/// Linear convolution of x and h, length x.size() + h.size() - 1.
std::vector<double> fft_convolve(std::span<const double> x,
                                 std::span<const double> h);

} // namespace neosleep::detail

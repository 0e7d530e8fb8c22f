#include "fft_utils.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstring>
#include <mutex>

namespace neosleep::detail {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct R2cPlan {
  std::size_t n;
  double* in;
  fftw_complex* out;
  fftw_plan plan;

  explicit R2cPlan(std::size_t n_) : n(n_) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~R2cPlan() {
    {
      std::lock_guard lock(plan_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
  R2cPlan(const R2cPlan&) = delete;
  R2cPlan& operator=(const R2cPlan&) = delete;
};

struct C2rPlan {
  std::size_t n;
  fftw_complex* in;
  double* out;
  fftw_plan plan;

  explicit C2rPlan(std::size_t n_) : n(n_) {
    in = fftw_alloc_complex(n / 2 + 1);
    out = fftw_alloc_real(n);
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~C2rPlan() {
    {
      std::lock_guard lock(plan_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
  C2rPlan(const C2rPlan&) = delete;
  C2rPlan& operator=(const C2rPlan&) = delete;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

} // namespace

std::vector<double> power_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  R2cPlan fft(n);
  std::copy(x.begin(), x.end(), fft.in);
  fftw_execute(fft.plan);

  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double re = fft.out[k][0];
    const double im = fft.out[k][1];
    power[k] = re * re + im * im;
  }
  return power;
}

std::vector<double> fft_convolve(std::span<const double> x,
                                 std::span<const double> h) {
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t L = next_pow2(out_len);

  R2cPlan fx(L);
  std::memset(fx.in, 0, L * sizeof(double));
  std::copy(x.begin(), x.end(), fx.in);
  fftw_execute(fx.plan);
  std::vector<std::complex<double>> spec_x(L / 2 + 1);
  std::memcpy(spec_x.data(), fx.out, spec_x.size() * sizeof(fftw_complex));

  std::memset(fx.in, 0, L * sizeof(double));
  std::copy(h.begin(), h.end(), fx.in);
  fftw_execute(fx.plan);

  C2rPlan inv(L);
  for (std::size_t k = 0; k < spec_x.size(); ++k) {
    const std::complex<double> prod =
        spec_x[k] * std::complex<double>(fx.out[k][0], fx.out[k][1]);
    inv.in[k][0] = prod.real();
    inv.in[k][1] = prod.imag();
  }
  fftw_execute(inv.plan);

  std::vector<double> result(out_len);
  const double scale = 1.0 / static_cast<double>(L);
  for (std::size_t i = 0; i < out_len; ++i) result[i] = inv.out[i] * scale;
  return result;
}

} // namespace neosleep::detail

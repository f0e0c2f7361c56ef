#pragma once

#include <fftw3.h>

#include "oscore/field.hpp"

namespace oscore {

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2D transform, unnormalized. FFTW planning is not thread safe,
// execution of a private plan is.
inline void fft2_raw(cplx* data, int height, int width, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(height, width,
                            reinterpret_cast<fftw_complex*>(data),
                            reinterpret_cast<fftw_complex*>(data),
                            sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

inline void scale_inplace(cplx* data, std::size_t n, double s) {
  for (std::size_t i = 0; i < n; ++i) data[i] *= s;
}

}  // namespace detail

// Frequency of bin i on an axis of length n, in cycles/px, in (-0.5, 0.5].
inline double bin_freq(int i, int n) {
  int k = (i <= n / 2) ? i : i - n;
  return static_cast<double>(k) / n;
}

// Unitary DFT; DC ends up at bin (0,0). Forward kernel exp(-2*pi*i*(ux/W+vy/H)),
// scaled by 1/sqrt(W*H) in each direction so Parseval holds exactly.
inline void dft2_inplace(cplx* data, int height, int width, bool inverse) {
  detail::fft2_raw(data, height, width, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  detail::scale_inplace(data, static_cast<std::size_t>(height) * width,
                        1.0 / std::sqrt(static_cast<double>(height) * width));
}

inline ComplexField2D dft2(const ComplexField2D& img) {
  if (img.width < 1 || img.height < 1) fail_usage("dft2: empty field");
  if (!img.finite()) fail_numerical("dft2: non-finite input sample");
  ComplexField2D out = img;
  dft2_inplace(out.data.data(), out.height, out.width, false);
  return out;
}

inline ComplexField2D idft2(const ComplexField2D& spec) {
  if (spec.width < 1 || spec.height < 1) fail_usage("idft2: empty field");
  if (!spec.finite()) fail_numerical("idft2: non-finite input sample");
  ComplexField2D out = spec;
  dft2_inplace(out.data.data(), out.height, out.width, true);
  return out;
}

// Circular convolution along the orientation axis. The kernel has one sample
// per axis bin; a discrete delta at bin 0 is the identity. `parity` describes
// the wraparound rule of the field over one period of the stored axis: +1 for
// plain periodic data, -1 for fields that flip sign when wrapping (odd-order
// spatial derivatives stored on a half circle).
inline Field3D periodic_convolve_axis(const Field3D& field,
                                      const std::vector<double>& kernel,
                                      int parity = +1) {
  const int n = field.n_theta;
  if (static_cast<int>(kernel.size()) != n)
    fail_usage("periodic_convolve_axis: kernel length must equal axis length");
  Field3D out(n, field.height, field.width);
  const std::size_t ps = field.plane_size();
  for (int t = 0; t < n; ++t) {
    cplx* dst = out.plane(t);
    for (int k = 0; k < n; ++k) {
      if (kernel[k] == 0.0) continue;
      int src = t - k;
      double sign = 1.0;
      while (src < 0) {
        src += n;
        sign *= parity;
      }
      const cplx* sp = field.plane(src);
      for (std::size_t i = 0; i < ps; ++i) dst[i] += (sign * kernel[k]) * sp[i];
    }
  }
  return out;
}

namespace detail {

inline void convolve_axis_real(const RealField3D& in, RealField3D& out,
                               const std::vector<double>& kernel, int parity) {
  const int n = in.n_theta;
  const std::size_t ps = in.plane_size();
  std::fill(out.data.begin(), out.data.end(), 0.0);
  for (int t = 0; t < n; ++t) {
    double* dst = out.plane(t);
    for (int k = 0; k < n; ++k) {
      if (kernel[k] == 0.0) continue;
      int src = t - k;
      double sign = 1.0;
      while (src < 0) {
        src += n;
        sign *= parity;
      }
      const double* sp = in.plane(src);
      double w = sign * kernel[k];
      for (std::size_t i = 0; i < ps; ++i) dst[i] += w * sp[i];
    }
  }
}

}  // namespace detail

// Discrete Gaussian kernel on a circular axis of n bins covering `period`
// radians, normalized to unit sum. sigma in radians.
inline std::vector<double> circular_gaussian_kernel(int n, double period, double sigma) {
  std::vector<double> k(n, 0.0);
  double step = period / n;
  if (sigma <= 0) {
    k[0] = 1.0;
    return k;
  }
  // wrap enough periods to capture the tails
  int wraps = std::max(1, static_cast<int>(std::ceil(4.0 * sigma / period)) + 1);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    int off = (i <= n / 2) ? i : i - n;
    double v = 0;
    for (int w = -wraps; w <= wraps; ++w) {
      double d = off * step + w * period;
      v += std::exp(-0.5 * d * d / (sigma * sigma));
    }
    k[i] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace oscore

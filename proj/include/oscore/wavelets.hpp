#pragma once

#include "oscore/bspline.hpp"
#include "oscore/fft.hpp"

namespace oscore {

// Single-scale cake wavelet design parameters. `inflection` is the bending
// point of the radial profile in cycles/px (Nyquist is 0.5).
struct CakeParams {
  int n_orient = 12;        // stored orientations over [0, pi)
  int spline_order = 3;     // k
  double inflection = 0.8 * kNyquist;
  int taylor_order = 8;     // N
  double spatial_window_scale = 0.0;  // px^2; <= 0 selects (min(W,H)/8)^2

  int n_theta_full() const { return 2 * n_orient; }
  double s_theta() const { return kTwoPi / n_theta_full(); }

  void validate() const {
    if (n_orient < 3) fail_usage("cake: n_orient must be >= 3");
    if (spline_order < 0) fail_usage("cake: spline order must be >= 0");
    if (inflection <= 0 || inflection > kNyquist)
      fail_usage("cake: inflection must be in (0, Nyquist]");
    if (taylor_order < 1) fail_usage("cake: taylor order must be >= 1");
  }
};

// Multi-scale kernel parameters. Derived scales a_l = a_minus*exp(l*s_rho).
struct MultiScaleParams {
  double a_minus = 1.5;                     // finest spatial scale, px
  double s_rho = std::log(9.5 / 1.5) / 4;   // log step fitting 1.5..9.5 px in 5 layers
  int n_rho = 12;                           // total Fourier scale samples
  int n_active = 5;                         // layers of interest; rest merged
  double window_sx = 0.0;  // px^2, along the wavelet orientation; <=0 -> (4 a_minus)^2
  double window_sy = 0.0;  // px^2, across; <=0 -> (16 a_minus)^2

  double scale(int l) const { return a_minus * std::exp(l * s_rho); }
  double sigma_x() const {
    return window_sx > 0 ? std::sqrt(window_sx) : 4.0 * a_minus;
  }
  double sigma_y() const {
    return window_sy > 0 ? std::sqrt(window_sy) : 16.0 * a_minus;
  }

  void validate() const {
    if (a_minus <= 0) fail_usage("ms: a_minus must be > 0");
    if (s_rho <= 0) fail_usage("ms: s_rho must be > 0");
    if (n_rho < 1 || n_active < 1 || n_active > n_rho)
      fail_usage("ms: need 1 <= n_active <= n_rho");
  }
};

// A layer of scale a is centered on the frequency ring rho = kScaleToFreq/a.
// The constant calibrates the scale axis so that an isotropic Gaussian blob of
// std a px puts its peak layer energy in the layer of scale a.
constexpr double kScaleToFreq = 1.2247448713915890 / kTwoPi;  // sqrt(3/2)/(2*pi)

// Angular factor of the Fourier wavelet, orientation 0; peak at phi = pi/2.
// The DC bin carries 1/N_theta so that the full bank preserves the image mean.
inline double angular_part(const CakeParams& p, double phi, double rho) {
  if (rho == 0.0) return 1.0 / p.n_theta_full();
  return bspline(p.spline_order, wrap_to_pi(phi - kPi / 2) / p.s_theta());
}

// Radial factor: Gaussian times the truncated Taylor series of its inverse,
// t^2 = 2*rhohat^2/(1+2N). Non-increasing, B(0)=1, drops through ~0.5 at the
// inflection point and to 0 beyond it.
inline double radial_part(const CakeParams& p, double rho) {
  double t2 = 2.0 * p.inflection * p.inflection / (1.0 + 2.0 * p.taylor_order);
  double x2 = rho * rho / t2;
  double term = 1.0, sum = 1.0;
  for (int i = 1; i <= p.taylor_order; ++i) {
    term *= x2 / i;
    sum += term;
  }
  return std::exp(-x2) * sum;
}

// Per-layer values of the log-radial envelope and their sum. Layer l covers
// the ring around kScaleToFreq / scale(l).
struct MsEnvelope {
  std::vector<double> layers;
  double sum = 0.0;
};

inline MsEnvelope ms_radial_envelope(const MultiScaleParams& p, int k, double rho) {
  MsEnvelope e;
  e.layers.resize(p.n_rho, 0.0);
  if (rho <= 0) return e;  // DC handled by convention elsewhere
  double u = std::log(rho * p.a_minus / kScaleToFreq) / p.s_rho;
  for (int l = 0; l < p.n_rho; ++l) {
    e.layers[l] = bspline(k, u + l);
    e.sum += e.layers[l];
  }
  return e;
}

// Bank of orientation(-and-scale) filters in the Fourier domain plus the
// stability map. Single-scale banks store the equalized half-circle filters;
// multi-scale banks store the base wavelet spectrum and synthesize filters on
// demand (full filter stacks at fundus resolution would not fit in memory).
struct KernelSet {
  int width = 0;
  int height = 0;
  bool multiscale = false;
  CakeParams cake;
  MultiScaleParams ms;

  std::vector<Image2D> filters;  // single-scale: j in [0, n_orient)
  Image2D base_abs;              // multiscale: |F[psi~MS]| at the finest scale
  Image2D stability;             // M_psi (single) or raw M(omega) (multi)
  double ms_norm_clamp = 0.0;    // clamp applied to M(omega) when dividing
  bool window_warning = false;
  std::vector<double> scales;    // active scales, px, strictly increasing
  bool has_residual = false;

  int n_orient() const { return cake.n_orient; }
  int n_layers() const {
    if (!multiscale) return 1;
    return static_cast<int>(scales.size()) + (has_residual ? 1 : 0);
  }
  int residual_layer() const { return has_residual ? n_layers() - 1 : -1; }
  double theta(int j) const { return j * cake.s_theta(); }

  Image2D make_filter(int layer, int j) const;
  bool in_band(int x, int y) const;
};

namespace detail {

inline std::size_t neg_index(int x, int y, int w, int h) {
  int nx = (w - x) % w;
  int ny = (h - y) % h;
  return static_cast<std::size_t>(ny) * w + nx;
}

// Multiplies a spatial field by a centered (wrap-aware) anisotropic Gaussian.
inline void apply_spatial_window(ComplexField2D& psi, double sx, double sy) {
  for (int y = 0; y < psi.height; ++y) {
    int dy = std::min(y, psi.height - y);
    double gy = std::exp(-0.5 * dy * dy / (sy * sy));
    for (int x = 0; x < psi.width; ++x) {
      int dx = std::min(x, psi.width - x);
      psi.at(x, y) *= gy * std::exp(-0.5 * dx * dx / (sx * sx));
    }
  }
}

// Bilinear sample of a Fourier-domain magnitude field at frequency (fx, fy)
// in cycles/px. Frequencies outside the representable square give 0.
inline double sample_spectrum(const Image2D& spec, double fx, double fy) {
  if (std::abs(fx) > 0.5 || std::abs(fy) > 0.5) return 0.0;
  const int w = spec.width, h = spec.height;
  double ix = fx * w, iy = fy * h;
  ix -= std::floor(ix / w) * w;
  iy -= std::floor(iy / h) * h;
  if (ix < 0) ix += w;
  if (iy < 0) iy += h;
  int x0 = static_cast<int>(std::floor(ix)) % w;
  int y0 = static_cast<int>(std::floor(iy)) % h;
  int x1 = (x0 + 1) % w;
  int y1 = (y0 + 1) % h;
  double tx = ix - std::floor(ix);
  double ty = iy - std::floor(iy);
  return spec.at(x0, y0) * (1 - tx) * (1 - ty) + spec.at(x1, y0) * tx * (1 - ty) +
         spec.at(x0, y1) * (1 - tx) * ty + spec.at(x1, y1) * tx * ty;
}

}  // namespace detail

// Equalization floor: below this raw bank power the filters are left at their
// constructed amplitude instead of being boosted towards M_psi = 1.
constexpr double kStabilityFloor = 1e-2;

// Builds the single-scale cake bank. Raw cake pieces A(phi - theta_j)*B(rho)
// tile the disk with sum 1, but their summed squared moduli sit near 0.5*B^2;
// the bank is therefore equalized in the Fourier domain so that
// M_psi = sum_j |F[psi_j]|^2 is 1 across the passband, which is what makes
// both Eq-style reconstruction and the stability criterion hold.
inline KernelSet build_cake_kernels(const CakeParams& p, int width, int height) {
  p.validate();
  if (width < 32 || height < 32)
    fail_usage("build_cake_kernels: image dims must be >= 32");

  KernelSet ks;
  ks.width = width;
  ks.height = height;
  ks.cake = p;

  const int n_half = p.n_orient;
  const int n_full = p.n_theta_full();
  double sw = p.spatial_window_scale > 0
                  ? std::sqrt(p.spatial_window_scale)
                  : std::min(width, height) / 8.0;

  ks.filters.assign(n_half, Image2D(width, height));
  parallel_for(n_half, [&](std::size_t j) {
    ComplexField2D spec(width, height);
    for (int y = 0; y < height; ++y) {
      double fy = bin_freq(y, height);
      for (int x = 0; x < width; ++x) {
        double fx = bin_freq(x, width);
        double rho = std::hypot(fx, fy);
        double phi = std::atan2(fy, fx);
        spec.at(x, y) =
            angular_part(p, phi - ks.theta(static_cast<int>(j)), rho) *
            radial_part(p, rho);
      }
    }
    // spatial Gaussian window, then back to the Fourier domain
    dft2_inplace(spec.data.data(), height, width, true);
    detail::apply_spatial_window(spec, sw, sw);
    dft2_inplace(spec.data.data(), height, width, false);
    // A real spectrum windowed by a real symmetric window stays real.
    ks.filters[j] = spec.real();
  });

  // Raw full-circle power via Psi_{j+n_half}(w) = Psi_j(-w), then equalize.
  Image2D m_raw(width, height);
  for (int j = 0; j < n_half; ++j) {
    const Image2D& f = ks.filters[j];
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double a = f.at(x, y);
        double b = f.data[detail::neg_index(x, y, width, height)];
        m_raw.at(x, y) += a * a + b * b;
      }
  }
  for (auto& f : ks.filters)
    for (std::size_t i = 0; i < f.size(); ++i)
      f.data[i] /= std::sqrt(std::max(m_raw.data[i], kStabilityFloor));

  ks.stability = Image2D(width, height);
  for (int j = 0; j < n_half; ++j) {
    const Image2D& f = ks.filters[j];
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double a = f.at(x, y);
        double b = f.data[detail::neg_index(x, y, width, height)];
        ks.stability.at(x, y) += a * a + b * b;
      }
  }
  (void)n_full;
  return ks;
}

// Builds the multi-scale bank: windowed base wavelet at the finest scale,
// per-(scale, orientation) filters as scaled/rotated spectrum samples, and the
// M(omega) normalization map that makes plain summation over scales and angles
// reconstruct the image.
inline KernelSet build_ms_kernels(const MultiScaleParams& mp, const CakeParams& cp,
                                  int width, int height) {
  mp.validate();
  cp.validate();
  if (width < 32 || height < 32)
    fail_usage("build_ms_kernels: image dims must be >= 32");

  KernelSet ks;
  ks.width = width;
  ks.height = height;
  ks.multiscale = true;
  ks.cake = cp;
  ks.ms = mp;
  for (int l = 0; l < mp.n_active; ++l) ks.scales.push_back(mp.scale(l));
  ks.has_residual = mp.n_active < mp.n_rho;

  // Base wavelet spectrum A(phi)*B_0(rho), windowed in space.
  ComplexField2D spec(width, height);
  for (int y = 0; y < height; ++y) {
    double fy = bin_freq(y, height);
    for (int x = 0; x < width; ++x) {
      double fx = bin_freq(x, width);
      double rho = std::hypot(fx, fy);
      double phi = std::atan2(fy, fx);
      double b0 = ms_radial_envelope(mp, cp.spline_order, rho).layers[0];
      spec.at(x, y) = rho > 0 ? angular_part(cp, phi, rho) * b0 : 0.0;
    }
  }
  dft2_inplace(spec.data.data(), height, width, true);
  detail::apply_spatial_window(spec, mp.sigma_x(), mp.sigma_y());
  dft2_inplace(spec.data.data(), height, width, false);

  // Oscillation diagnostic: a too-narrow window rings, pushing the (real)
  // spectrum negative.
  double neg = 0, tot = 0;
  ks.base_abs = Image2D(width, height);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double re = spec.data[i].real();
    tot += re * re;
    if (re < 0) neg += re * re;
    ks.base_abs.data[i] = std::abs(re);
  }
  ks.window_warning = tot > 0 && neg > 0.2 * tot;

  // M(omega) = (Nrho*Ntheta)^-1 sum_i sum_j a_i^-1 |F[base](a_i R_j^-1 w)|
  // over the full circle; a_i here is relative to the design scale a_minus.
  const int n_full = cp.n_theta_full();
  Image2D m(width, height);
  for (int l = 0; l < mp.n_rho; ++l) {
    double afac = mp.scale(l) / mp.a_minus;
    for (int j = 0; j < n_full; ++j) {
      double th = ks.theta(j);
      double c = std::cos(th), s = std::sin(th);
      parallel_for(height, [&](std::size_t y) {
        double fy = bin_freq(static_cast<int>(y), height);
        for (int x = 0; x < width; ++x) {
          double fx = bin_freq(x, width);
          // rotate by -theta_j, then scale by a
          double wx = afac * (c * fx + s * fy);
          double wy = afac * (-s * fx + c * fy);
          m.at(x, static_cast<int>(y)) +=
              detail::sample_spectrum(ks.base_abs, wx, wy) / afac;
        }
      });
    }
  }
  for (double& v : m.data) v /= static_cast<double>(mp.n_rho) * n_full;
  double m_max = m.max_abs();
  if (m_max <= 0) fail_numerical("build_ms_kernels: degenerate bank");
  ks.ms_norm_clamp = 1e-4 * m_max;
  ks.stability = std::move(m);
  return ks;
}

inline bool KernelSet::in_band(int x, int y) const {
  double rho = std::hypot(bin_freq(x, width), bin_freq(y, height));
  if (!multiscale) return rho > 0 && rho <= cake.inflection;
  return rho > 0 && stability.at(x, y) >= 1e-3 * stability.max_abs();
}

// Fourier-domain filter (real spectrum) for one (layer, orientation) slot.
// For multi-scale banks the residual layer is the sum of all merged layers,
// so the stored bank still tiles the whole covered band.
inline Image2D KernelSet::make_filter(int layer, int j) const {
  if (!multiscale) {
    if (layer != 0) fail_usage("single-scale kernel set has one layer");
    return filters.at(static_cast<std::size_t>(j));
  }
  const int n_full = cake.n_theta_full();
  double th = theta(j);
  double c = std::cos(th), s = std::sin(th);
  int l_lo, l_hi;
  if (has_residual && layer == residual_layer()) {
    l_lo = ms.n_active;
    l_hi = ms.n_rho;
  } else {
    if (layer < 0 || layer >= static_cast<int>(scales.size()))
      fail_usage("make_filter: layer out of range");
    l_lo = layer;
    l_hi = layer + 1;
  }
  Image2D out(width, height);
  const double norm_den = static_cast<double>(ms.n_rho) * n_full;
  for (int l = l_lo; l < l_hi; ++l) {
    double afac = ms.scale(l) / ms.a_minus;
    for (int y = 0; y < height; ++y) {
      double fy = bin_freq(y, height);
      for (int x = 0; x < width; ++x) {
        double fx = bin_freq(x, width);
        double wx = afac * (c * fx + s * fy);
        double wy = afac * (-s * fx + c * fy);
        double g = detail::sample_spectrum(base_abs, wx, wy) / afac;
        out.at(x, y) +=
            g / (norm_den * std::max(stability.at(x, y), ms_norm_clamp));
      }
    }
  }
  // Even DC split across the whole bank preserves the image mean exactly.
  out.at(0, 0) = static_cast<double>(l_hi - l_lo) / norm_den;
  return out;
}

}  // namespace oscore

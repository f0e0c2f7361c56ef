#pragma once

#include <array>

#include "oscore/ostransform.hpp"

namespace oscore {

// Regularization/metric parameters on SE(2). beta converts between angular
// and spatial units; the angular smoothing scale is tied to the spatial one.
struct Se2Params {
  double beta = 0.05 / 3.8;  // 1/px
  double sigma_s = 1.9;      // px

  double sigma_theta() const { return beta * sigma_s; }
  void validate() const {
    if (beta <= 0) fail_usage("se2: beta must be > 0");
    if (sigma_s <= 0) fail_usage("se2: sigma_s must be > 0");
    if (sigma_theta() >= kPi / 2)
      fail_usage("se2: angular scale beta*sigma_s must stay below pi/2");
  }
};

enum class Axis { Xi, Eta, Theta };

namespace detail {

// Exact heat kernel on the full 2*n-bin orientation circle, folded onto the
// stored half circle. parity +1 picks the pi-periodic component (Re U), -1
// the pi-antiperiodic one (Im U, odd-order spatial derivative fields).
// Spectral construction, so repeated smoothing composes exactly.
inline std::vector<double> folded_theta_heat_kernel(int n, double sigma, int parity) {
  const int m = 2 * n;
  std::vector<double> full(m, 0.0);
  for (int j = 0; j < m; ++j) {
    double acc = 0;
    for (int k = -n; k < n; ++k)
      acc += std::exp(-0.5 * sigma * sigma * k * k) *
             std::cos(kTwoPi * k * j / m);
    full[j] = acc / m;
  }
  std::vector<double> kern(n);
  for (int j = 0; j < n; ++j) kern[j] = full[j] + parity * full[j + n];
  return kern;
}

// Per-plane spectral Gaussian smoothing (periodic), sigma in px.
inline void spatial_gaussian_plane(cplx* plane, int h, int w, double sigma) {
  dft2_inplace(plane, h, w, false);
  for (int y = 0; y < h; ++y) {
    double wy = kTwoPi * bin_freq(y, h);
    for (int x = 0; x < w; ++x) {
      double wx = kTwoPi * bin_freq(x, w);
      plane[static_cast<std::size_t>(y) * w + x] *=
          std::exp(-0.5 * sigma * sigma * (wx * wx + wy * wy));
    }
  }
  dft2_inplace(plane, h, w, true);
}

// theta derivative by central differences with parity-aware wraparound.
inline RealField3D theta_central_diff(const RealField3D& v, int parity) {
  const int n = v.n_theta;
  const double h = kPi / n;
  RealField3D out(n, v.height, v.width);
  const std::size_t ps = v.plane_size();
  for (int t = 0; t < n; ++t) {
    int tp = t + 1, tm = t - 1;
    double sp = 1, sm = 1;
    if (tp >= n) { tp -= n; sp = parity; }
    if (tm < 0) { tm += n; sm = parity; }
    const double* vp = v.plane(tp);
    const double* vm = v.plane(tm);
    double* o = out.plane(t);
    for (std::size_t i = 0; i < ps; ++i) o[i] = (sp * vp[i] - sm * vm[i]) / (2 * h);
  }
  return out;
}

inline RealField3D theta_second_diff(const RealField3D& v, int parity) {
  const int n = v.n_theta;
  const double h = kPi / n;
  RealField3D out(n, v.height, v.width);
  const std::size_t ps = v.plane_size();
  for (int t = 0; t < n; ++t) {
    int tp = t + 1, tm = t - 1;
    double sp = 1, sm = 1;
    if (tp >= n) { tp -= n; sp = parity; }
    if (tm < 0) { tm += n; sm = parity; }
    const double* vp = v.plane(tp);
    const double* vm = v.plane(tm);
    const double* v0 = v.plane(t);
    double* o = out.plane(t);
    for (std::size_t i = 0; i < ps; ++i)
      o[i] = (sp * vp[i] - 2 * v0[i] + sm * vm[i]) / (h * h);
  }
  return out;
}

// First-order spatial derivative along the frame direction of each slice,
// spectrally: multiplier i*(cos(th) wx + sin(th) wy) (Xi) or the rotated one.
inline RealField3D spatial_frame_derivative(const RealField3D& v, Axis ax,
                                            const std::vector<double>& thetas) {
  RealField3D out(v.n_theta, v.height, v.width);
  parallel_for(v.n_theta, [&](std::size_t t) {
    const int h = v.height, w = v.width;
    std::vector<cplx> buf(v.plane_size());
    const double* src = v.plane(static_cast<int>(t));
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = src[i];
    dft2_inplace(buf.data(), h, w, false);
    double c = std::cos(thetas[t]), s = std::sin(thetas[t]);
    if (ax == Axis::Eta) {
      double tmp = c;
      c = -s;
      s = tmp;
    }
    for (int y = 0; y < h; ++y) {
      double wy = kTwoPi * bin_freq(y, h);
      for (int x = 0; x < w; ++x) {
        double wx = kTwoPi * bin_freq(x, w);
        buf[static_cast<std::size_t>(y) * w + x] *= cplx(0.0, c * wx + s * wy);
      }
    }
    dft2_inplace(buf.data(), h, w, true);
    double* dst = out.plane(static_cast<int>(t));
    for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i].real();
  });
  return out;
}

}  // namespace detail

// Elliptic (beta-isotropic) Gaussian regularization: spatial blur of std
// sigma_s on every slice plus circular smoothing of std beta*sigma_s along
// theta, with the conjugation wraparound rule of half-circle scores.
inline OrientationScore regularize(const OrientationScore& u, const Se2Params& p) {
  p.validate();
  OrientationScore out = u;
  parallel_for(u.field.n_theta, [&](std::size_t t) {
    detail::spatial_gaussian_plane(out.field.plane(static_cast<int>(t)),
                                   u.field.height, u.field.width, p.sigma_s);
  });
  const int n = u.field.n_theta;
  auto kp = detail::folded_theta_heat_kernel(n, p.sigma_theta(), +1);
  auto km = detail::folded_theta_heat_kernel(n, p.sigma_theta(), -1);
  Field3D mixed(n, u.field.height, u.field.width);
  const std::size_t ps = u.field.plane_size();
  for (int t = 0; t < n; ++t) {
    cplx* dst = mixed.plane(t);
    for (int k = 0; k < n; ++k) {
      int src = (t - k + n) % n;
      const cplx* sp = out.field.plane(src);
      for (std::size_t i = 0; i < ps; ++i)
        dst[i] += cplx(kp[k] * sp[i].real(), km[k] * sp[i].imag());
    }
  }
  out.field = std::move(mixed);
  return out;
}

namespace detail {

inline std::vector<double> half_circle_thetas(int n) {
  std::vector<double> th(n);
  for (int i = 0; i < n; ++i) th[i] = i * kPi / n;
  return th;
}

inline RealField3D real_part(const Field3D& f) {
  RealField3D out(f.n_theta, f.height, f.width);
  for (std::size_t i = 0; i < f.data.size(); ++i) out.data[i] = f.data[i].real();
  return out;
}

}  // namespace detail

// Regularized left-invariant derivative of Re(U) along a multi-index over
// {Xi, Eta, Theta} (order <= 2). Spatial factors are spectral Gaussian
// derivatives; theta factors are central differences. Fields acquired through
// an odd number of spatial frame derivatives are pi-antiperiodic, which the
// theta wraparound honors.
inline RealField3D li_derivative(const OrientationScore& u, const Se2Params& p,
                                 const std::vector<Axis>& index) {
  if (index.size() > 2) fail_usage("li_derivative: order must be <= 2");
  OrientationScore reg = regularize(u, p);
  RealField3D v = detail::real_part(reg.field);
  auto thetas = detail::half_circle_thetas(v.n_theta);
  int parity = +1;
  for (Axis ax : index) {
    if (ax == Axis::Theta) {
      v = detail::theta_central_diff(v, parity);
    } else {
      v = detail::spatial_frame_derivative(v, ax, thetas);
      parity = -parity;
    }
  }
  return v;
}

// Symmetric 3x3 field in the beta-normalized (xi, eta, theta) frame.
struct HessianField {
  // component order: xx, xy, xt, yy, yt, tt with (x,y,t) = (xi, eta, theta)
  std::array<RealField3D, 6> comp;
  double beta = 0;
  int n_theta = 0, height = 0, width = 0;

  const RealField3D& xx() const { return comp[0]; }
  const RealField3D& xy() const { return comp[1]; }
  const RealField3D& xt() const { return comp[2]; }
  const RealField3D& yy() const { return comp[3]; }
  const RealField3D& yt() const { return comp[4]; }
  const RealField3D& tt() const { return comp[5]; }
};

// Hessian of the regularized Re(U) in the left-invariant frame, normalized by
// D = diag(1, 1, beta) and symmetrized (mixed theta/spatial entries average
// the two composition orders).
inline HessianField hessian_se2(const OrientationScore& u, const Se2Params& p) {
  p.validate();
  OrientationScore reg = regularize(u, p);
  RealField3D sm = detail::real_part(reg.field);
  const int n = sm.n_theta, h = sm.height, w = sm.width;
  auto thetas = detail::half_circle_thetas(n);

  HessianField out;
  out.beta = p.beta;
  out.n_theta = n;
  out.height = h;
  out.width = w;
  for (auto& c : out.comp) c = RealField3D(n, h, w);

  RealField3D dx(n, h, w), dy(n, h, w), dxx(n, h, w), dyy(n, h, w), dxy(n, h, w);
  parallel_for(n, [&](std::size_t t) {
    std::vector<cplx> spec(sm.plane_size());
    const double* src = sm.plane(static_cast<int>(t));
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = src[i];
    dft2_inplace(spec.data(), h, w, false);
    auto emit = [&](RealField3D& dst, auto mult) {
      std::vector<cplx> buf(spec);
      for (int y = 0; y < h; ++y) {
        double wy = kTwoPi * bin_freq(y, h);
        for (int x = 0; x < w; ++x) {
          double wx = kTwoPi * bin_freq(x, w);
          buf[static_cast<std::size_t>(y) * w + x] *= mult(wx, wy);
        }
      }
      dft2_inplace(buf.data(), h, w, true);
      double* d = dst.plane(static_cast<int>(t));
      for (std::size_t i = 0; i < buf.size(); ++i) d[i] = buf[i].real();
    };
    emit(dx, [](double wx, double) { return cplx(0, wx); });
    emit(dy, [](double, double wy) { return cplx(0, wy); });
    emit(dxx, [](double wx, double) { return cplx(-wx * wx, 0); });
    emit(dyy, [](double, double wy) { return cplx(-wy * wy, 0); });
    emit(dxy, [](double wx, double wy) { return cplx(-wx * wy, 0); });
  });

  // rotate spatial derivatives into the moving frame
  RealField3D dxi(n, h, w), deta(n, h, w);
  const std::size_t ps = sm.plane_size();
  for (int t = 0; t < n; ++t) {
    double c = std::cos(thetas[t]), s = std::sin(thetas[t]);
    const double *px = dx.plane(t), *py = dy.plane(t);
    const double *pxx = dxx.plane(t), *pyy = dyy.plane(t), *pxy = dxy.plane(t);
    double *oxi = dxi.plane(t), *oeta = deta.plane(t);
    double *hxx = out.comp[0].plane(t), *hxy = out.comp[1].plane(t),
           *hyy = out.comp[3].plane(t);
    for (std::size_t i = 0; i < ps; ++i) {
      oxi[i] = c * px[i] + s * py[i];
      oeta[i] = -s * px[i] + c * py[i];
      hxx[i] = c * c * pxx[i] + 2 * c * s * pxy[i] + s * s * pyy[i];
      hyy[i] = s * s * pxx[i] - 2 * c * s * pxy[i] + c * c * pyy[i];
      hxy[i] = -c * s * pxx[i] + (c * c - s * s) * pxy[i] + c * s * pyy[i];
    }
  }
  dx = RealField3D();
  dy = RealField3D();
  dxx = RealField3D();
  dyy = RealField3D();
  dxy = RealField3D();

  RealField3D htt = detail::theta_second_diff(sm, +1);
  RealField3D dth_sm = detail::theta_central_diff(sm, +1);
  RealField3D dxi_dth = detail::spatial_frame_derivative(dth_sm, Axis::Xi, thetas);
  RealField3D deta_dth = detail::spatial_frame_derivative(dth_sm, Axis::Eta, thetas);
  dth_sm = RealField3D();
  RealField3D dth_dxi = detail::theta_central_diff(dxi, -1);
  RealField3D dth_deta = detail::theta_central_diff(deta, -1);

  const double b = p.beta;
  for (std::size_t i = 0; i < out.comp[2].data.size(); ++i) {
    out.comp[2].data[i] = 0.5 * b * (dth_dxi.data[i] + dxi_dth.data[i]);
    out.comp[4].data[i] = 0.5 * b * (dth_deta.data[i] + deta_dth.data[i]);
    out.comp[5].data[i] = b * b * htt.data[i];
  }
  return out;
}

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix. Deterministic;
// eigenvalues returned with matching eigenvector columns.
inline void sym3_eig(const double a_in[6], double lam[3], double vec[3][3]) {
  double a[3][3] = {{a_in[0], a_in[1], a_in[2]},
                    {a_in[1], a_in[3], a_in[4]},
                    {a_in[2], a_in[4], a_in[5]}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    double diag = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]);
    if (off <= 1e-15 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0) continue;
        double tau = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        double t = (tau >= 0 ? 1.0 : -1.0) /
                   (std::abs(tau) + std::sqrt(1 + tau * tau));
        double c = 1 / std::sqrt(1 + t * t), s = t * c;
        for (int k = 0; k < 3; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  // sort by |lambda| ascending; ties keep original index order
  int order[3] = {0, 1, 2};
  double d[3] = {a[0][0], a[1][1], a[2][2]};
  std::stable_sort(order, order + 3, [&](int i, int j) {
    return std::abs(d[i]) < std::abs(d[j]);
  });
  for (int i = 0; i < 3; ++i) {
    lam[i] = d[order[i]];
    for (int k = 0; k < 3; ++k) vec[i][k] = v[k][order[i]];
    // sign fix: the largest-magnitude component positive
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(vec[i][k]) > std::abs(vec[i][best])) best = k;
    if (vec[i][best] < 0)
      for (int k = 0; k < 3; ++k) vec[i][k] = -vec[i][k];
  }
}

}  // namespace detail

// Per-voxel eigenvalues (|l1| <= |l2| <= |l3|) and orthonormal eigenvectors.
struct GaugeFrameField {
  RealField3D lam1, lam2, lam3;
  // eigenvectors stored row-major per voxel: 3 vectors x 3 components
  std::vector<float> vectors;
  long zeroed_voxels = 0;  // non-finite inputs flagged and zeroed

  int n_theta = 0, height = 0, width = 0;
  const float* vec(int t, int y, int x) const {
    std::size_t idx =
        (static_cast<std::size_t>(t) * height + y) * width + x;
    return vectors.data() + idx * 9;
  }
};

inline GaugeFrameField gauge_eig(const HessianField& hf) {
  GaugeFrameField g;
  g.n_theta = hf.n_theta;
  g.height = hf.height;
  g.width = hf.width;
  g.lam1 = RealField3D(hf.n_theta, hf.height, hf.width);
  g.lam2 = RealField3D(hf.n_theta, hf.height, hf.width);
  g.lam3 = RealField3D(hf.n_theta, hf.height, hf.width);
  const std::size_t n = g.lam1.data.size();
  g.vectors.resize(n * 9);
  std::vector<long> zero_counts(hf.n_theta, 0);
  parallel_for(hf.n_theta, [&](std::size_t t) {
    const std::size_t ps = hf.comp[0].plane_size();
    for (std::size_t i = 0; i < ps; ++i) {
      std::size_t idx = t * ps + i;
      double a[6];
      bool ok = true;
      for (int c = 0; c < 6; ++c) {
        a[c] = hf.comp[c].data[idx];
        ok = ok && std::isfinite(a[c]);
      }
      double lam[3], vec[3][3];
      if (!ok) {
        lam[0] = lam[1] = lam[2] = 0;
        for (int r = 0; r < 3; ++r)
          for (int k = 0; k < 3; ++k) vec[r][k] = (r == k) ? 1.0 : 0.0;
        ++zero_counts[t];
      } else {
        detail::sym3_eig(a, lam, vec);
      }
      g.lam1.data[idx] = lam[0];
      g.lam2.data[idx] = lam[1];
      g.lam3.data[idx] = lam[2];
      float* vp = g.vectors.data() + idx * 9;
      for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) vp[r * 3 + k] = static_cast<float>(vec[r][k]);
    }
  });
  for (long c : zero_counts) g.zeroed_voxels += c;
  return g;
}

}  // namespace oscore

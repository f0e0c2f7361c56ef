#pragma once

#include <limits>

#include "oscore/se2ops.hpp"

namespace oscore {

enum class VesselVariant { XiEta, Gauge, Frangi2D };
enum class Polarity { DarkVessels, BrightVessels };

struct VesselnessParams {
  double sigma1 = 0.5;
  double sigma2_factor = 0.2;
  VesselVariant variant = VesselVariant::Gauge;
  Polarity polarity = Polarity::DarkVessels;
  double c_beta = 0.05;  // beta = c_beta / a

  void validate() const {
    if (sigma1 <= 0) fail_usage("vesselness: sigma1 must be > 0");
    if (sigma2_factor <= 0 || sigma2_factor > 1)
      fail_usage("vesselness: sigma2_factor must be in (0, 1]");
    if (c_beta <= 0) fail_usage("vesselness: c_beta must be > 0");
  }
};

// Anisotropy ratio R, structure energy S, convexity Q per score voxel.
struct MeasureFields {
  RealField3D R, S, Q;
};

namespace detail {

constexpr double kInfR = std::numeric_limits<double>::infinity();

// Guarded ratio num/den: denominators below eps_mach * ||den||_inf become a
// +inf sentinel so the anisotropy term kills the response instead of NaN.
inline double guarded_ratio(double num, double den, double den_floor) {
  if (!(std::abs(den) > den_floor)) return kInfR;  // catches den = floor = 0
  return num / den;
}

}  // namespace detail

// {xi, eta}-frame measures (fixed frame per orientation slice):
// R = U_xixi / U_etaeta, S = U_xixi^2 + U_etaeta^2, Q = U_etaeta.
inline MeasureFields measures_xi_eta(const OrientationScore& u, const Se2Params& p) {
  RealField3D uxx = li_derivative(u, p, {Axis::Xi, Axis::Xi});
  RealField3D uyy = li_derivative(u, p, {Axis::Eta, Axis::Eta});
  MeasureFields m;
  const int n = uxx.n_theta, h = uxx.height, w = uxx.width;
  m.R = RealField3D(n, h, w);
  m.S = RealField3D(n, h, w);
  m.Q = RealField3D(n, h, w);
  double den_floor =
      std::numeric_limits<double>::epsilon() * uyy.max_abs();
  for (std::size_t i = 0; i < uxx.data.size(); ++i) {
    double a = uxx.data[i], c = uyy.data[i];
    m.R.data[i] = detail::guarded_ratio(a, c, den_floor);
    m.S.data[i] = a * a + c * c;
    m.Q.data[i] = c;
  }
  return m;
}

// Gauge-frame measures from Hessian eigenvalues sorted by magnitude:
// c = (l2 + l3)/2, R = l1/c, S = l1^2 + c^2, Q = c.
inline MeasureFields measures_gauge(const GaugeFrameField& g) {
  MeasureFields m;
  const int n = g.n_theta, h = g.height, w = g.width;
  m.R = RealField3D(n, h, w);
  m.S = RealField3D(n, h, w);
  m.Q = RealField3D(n, h, w);
  double cmax = 0;
  for (std::size_t i = 0; i < g.lam1.data.size(); ++i)
    cmax = std::max(cmax,
                    std::abs(0.5 * (g.lam2.data[i] + g.lam3.data[i])));
  double den_floor = std::numeric_limits<double>::epsilon() * cmax;
  for (std::size_t i = 0; i < g.lam1.data.size(); ++i) {
    double l1 = g.lam1.data[i];
    double c = 0.5 * (g.lam2.data[i] + g.lam3.data[i]);
    m.R.data[i] = detail::guarded_ratio(l1, c, den_floor);
    m.S.data[i] = l1 * l1 + c * c;
    m.Q.data[i] = c;
  }
  return m;
}

namespace detail {

// Same as gauge_eig + measures_gauge but without materializing eigenvectors;
// used by the multi-scale pipeline to keep memory flat.
inline MeasureFields measures_gauge_from_hessian(const HessianField& hf) {
  MeasureFields m;
  const int n = hf.n_theta, h = hf.height, w = hf.width;
  m.R = RealField3D(n, h, w);
  m.S = RealField3D(n, h, w);
  m.Q = RealField3D(n, h, w);
  const std::size_t total = m.R.data.size();
  std::vector<double> cbuf(total), l1buf(total);
  parallel_for(n, [&](std::size_t t) {
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
      } else {
        sym3_eig(a, lam, vec);
      }
      l1buf[idx] = lam[0];
      cbuf[idx] = 0.5 * (lam[1] + lam[2]);
    }
  });
  double cmax = 0;
  for (double c : cbuf) cmax = std::max(cmax, std::abs(c));
  double den_floor = std::numeric_limits<double>::epsilon() * cmax;
  for (std::size_t i = 0; i < total; ++i) {
    m.R.data[i] = guarded_ratio(l1buf[i], cbuf[i], den_floor);
    m.S.data[i] = l1buf[i] * l1buf[i] + cbuf[i] * cbuf[i];
    m.Q.data[i] = cbuf[i];
  }
  return m;
}

// {xi, eta} measures straight from precomputed Hessian components (the
// spatial entries are unaffected by the beta normalization).
inline MeasureFields measures_from_xi_eta_hessian(const HessianField& hf) {
  MeasureFields m;
  m.R = RealField3D(hf.n_theta, hf.height, hf.width);
  m.S = RealField3D(hf.n_theta, hf.height, hf.width);
  m.Q = RealField3D(hf.n_theta, hf.height, hf.width);
  double den_floor =
      std::numeric_limits<double>::epsilon() * hf.yy().max_abs();
  for (std::size_t i = 0; i < m.R.data.size(); ++i) {
    double a = hf.xx().data[i], c = hf.yy().data[i];
    m.R.data[i] = guarded_ratio(a, c, den_floor);
    m.S.data[i] = a * a + c * c;
    m.Q.data[i] = c;
  }
  return m;
}

}  // namespace detail

// Frangi-style response from the measures. Hard zero for Q <= 0; otherwise
// exp(-R^2 / 2 sigma1^2) * (1 - exp(-S / 2 sigma2^2)) with
// sigma2 = sigma2_factor * ||S||_inf over the whole layer.
inline RealField3D vesselness_core(const MeasureFields& m, double sigma1,
                                   double sigma2_factor) {
  if (sigma1 <= 0 || sigma2_factor <= 0)
    fail_usage("vesselness_core: sigmas must be positive");
  RealField3D out(m.R.n_theta, m.R.height, m.R.width);
  double s_max = 0;
  for (double s : m.S.data) {
    if (!std::isfinite(s)) fail_numerical("vesselness_core: S not finite");
    s_max = std::max(s_max, s);
  }
  if (s_max == 0) return out;  // flat input: whole layer stays zero
  // S is already a squared quantity, so sigma2^2 is pinned to ||S||_inf to
  // keep the exponent dimensionless (and the map contrast-invariant)
  const double ir = 1.0 / (2 * sigma1 * sigma1);
  const double is = 1.0 / (2 * sigma2_factor * sigma2_factor * s_max);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!(m.Q.data[i] > 0)) continue;  // exact zero, also for NaN Q
    double r = m.R.data[i];
    double aniso = std::isinf(r) ? 0.0 : std::exp(-r * r * ir);
    out.data[i] = aniso * (1.0 - std::exp(-m.S.data[i] * is));
  }
  return out;
}

struct VesselnessMap {
  Image2D map;                 // values in [0, 1]
  std::vector<double> scales;  // scales that contributed
};

// Multi-scale orientation-score vesselness. Per active scale: analysis layer,
// left-invariant Hessian with beta = c_beta/a and sigma_s = a/2, measures in
// the requested frame, response summed over orientations and max-normalized;
// the per-scale maps are summed and max-normalized again. The merged residual
// layer is reconstruction-only and never enters here.
inline VesselnessMap vesselness_sim2(const Image2D& f,
                                     const VesselnessParams& vp,
                                     const KernelSet& ks) {
  vp.validate();
  if (!ks.multiscale)
    fail_usage("vesselness_sim2: requires a multi-scale kernel set");
  if (vp.variant == VesselVariant::Frangi2D)
    fail_usage("vesselness_sim2: use frangi_multiscale for the 2D baseline");
  if (f.width != ks.width || f.height != ks.height)
    fail_usage("vesselness_sim2: image/kernel size mismatch");

  Image2D input = f;
  if (vp.polarity == Polarity::BrightVessels)
    for (double& v : input.data) v = -v;

  const int n_active = static_cast<int>(ks.scales.size());
  Image2D acc(f.width, f.height);
  for (int layer = 0; layer < n_active; ++layer) {
    const double a = ks.scales[layer];
    OrientationScore u;
    u.field = forward_layer(input, ks, layer);
    Se2Params se2{vp.c_beta / a, 0.5 * a};
    HessianField hf = hessian_se2(u, se2);
    MeasureFields m = (vp.variant == VesselVariant::Gauge)
                          ? detail::measures_gauge_from_hessian(hf)
                          : detail::measures_from_xi_eta_hessian(hf);
    RealField3D v = vesselness_core(m, vp.sigma1, vp.sigma2_factor);
    // orientation sum, then per-scale max normalization
    Image2D scale_map(f.width, f.height);
    const std::size_t ps = v.plane_size();
    for (int t = 0; t < v.n_theta; ++t) {
      const double* pl = v.plane(t);
      for (std::size_t i = 0; i < ps; ++i) scale_map.data[i] += pl[i];
    }
    double mx = scale_map.max_abs();
    if (mx > 0)
      for (std::size_t i = 0; i < scale_map.data.size(); ++i)
        acc.data[i] += scale_map.data[i] / mx;
  }
  double gmx = acc.max_abs();
  if (gmx > 0)
    for (double& v : acc.data) v /= gmx;
  VesselnessMap out;
  out.map = std::move(acc);
  out.scales = ks.scales;
  return out;
}

// 2D Frangi baseline: Gaussian Hessian per scale (std a, responses
// a^2-normalized so coarse scales compete fairly), dark-vessel convexity
// lambda2 <= 0 suppressed after polarity flip, per-scale and global
// max-normalization as in the multi-scale recombination.
struct FrangiDiagnostics {
  std::vector<double> per_scale_max_abs_l2;  // max |lambda2| per scale
};

inline VesselnessMap frangi_multiscale(const Image2D& f,
                                       const std::vector<double>& scales,
                                       double sigma1, double sigma2_factor,
                                       Polarity polarity,
                                       FrangiDiagnostics* diag = nullptr) {
  if (scales.empty()) fail_usage("frangi: need at least one scale");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1])
      fail_usage("frangi: scales must be strictly increasing");
  if (sigma1 <= 0 || sigma2_factor <= 0 || sigma2_factor > 1)
    fail_usage("frangi: bad sigma parameters");

  const int w = f.width, h = f.height;
  std::vector<cplx> f_hat(f.data.size());
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    double v = f.data[i];
    f_hat[i] = (polarity == Polarity::BrightVessels) ? -v : v;
  }
  dft2_inplace(f_hat.data(), h, w, false);

  Image2D acc(w, h);
  for (double a : scales) {
    std::vector<cplx> gxx(f_hat), gyy, gxy;
    gyy.reserve(f_hat.size());
    // one pass: regularize and apply second-derivative multipliers
    std::vector<cplx> base(f_hat);
    for (int y = 0; y < h; ++y) {
      double wy = kTwoPi * bin_freq(y, h);
      for (int x = 0; x < w; ++x) {
        double wx = kTwoPi * bin_freq(x, w);
        base[static_cast<std::size_t>(y) * w + x] *=
            std::exp(-0.5 * a * a * (wx * wx + wy * wy));
      }
    }
    auto second = [&](double fx, double fy, std::vector<cplx>& dst, int y,
                      int x) {
      dst[static_cast<std::size_t>(y) * w + x] =
          base[static_cast<std::size_t>(y) * w + x] * (-fx * fy);
    };
    gxx.assign(f_hat.size(), cplx(0));
    gyy.assign(f_hat.size(), cplx(0));
    gxy.assign(f_hat.size(), cplx(0));
    for (int y = 0; y < h; ++y) {
      double wy = kTwoPi * bin_freq(y, h);
      for (int x = 0; x < w; ++x) {
        double wx = kTwoPi * bin_freq(x, w);
        second(wx, wx, gxx, y, x);
        second(wy, wy, gyy, y, x);
        second(wx, wy, gxy, y, x);
      }
    }
    dft2_inplace(gxx.data(), h, w, true);
    dft2_inplace(gyy.data(), h, w, true);
    dft2_inplace(gxy.data(), h, w, true);

    const double norm = a * a;  // scale normalization (gamma = 2)
    Image2D v_scale(w, h);
    double max_l2 = 0, s_max = 0;
    std::vector<double> l1v(f.data.size()), l2v(f.data.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      double hxx = norm * gxx[i].real();
      double hyy = norm * gyy[i].real();
      double hxy = norm * gxy[i].real();
      double tr = 0.5 * (hxx + hyy);
      double det = std::sqrt(0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy);
      double la = tr - det, lb = tr + det;
      double l1 = (std::abs(la) <= std::abs(lb)) ? la : lb;
      double l2 = (std::abs(la) <= std::abs(lb)) ? lb : la;
      l1v[i] = l1;
      l2v[i] = l2;
      max_l2 = std::max(max_l2, std::abs(l2));
      s_max = std::max(s_max, l1 * l1 + l2 * l2);
    }
    if (diag) diag->per_scale_max_abs_l2.push_back(max_l2);
    if (s_max == 0) continue;
    const double ir = 1.0 / (2 * sigma1 * sigma1);
    const double is = 1.0 / (2 * sigma2_factor * sigma2_factor * s_max);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      // a dark vessel is an intensity valley, so the cross-vessel second
      // derivative is positive; lambda2 > 0 is the signal to keep
      double l2 = l2v[i];
      if (!(l2 > 0)) continue;
      double rb = l1v[i] / l2;
      double s = l1v[i] * l1v[i] + l2 * l2;
      v_scale.data[i] = std::exp(-rb * rb * ir) * (1.0 - std::exp(-s * is));
    }
    double mx = v_scale.max_abs();
    if (mx > 0)
      for (std::size_t i = 0; i < acc.data.size(); ++i)
        acc.data[i] += v_scale.data[i] / mx;
  }
  double gmx = acc.max_abs();
  if (gmx > 0)
    for (double& v : acc.data) v /= gmx;
  VesselnessMap out;
  out.map = std::move(acc);
  out.scales = scales;
  return out;
}

}  // namespace oscore

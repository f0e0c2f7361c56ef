#pragma once

#include <deque>

#include "oscore/vesselness.hpp"

namespace oscore {

struct SegParams {
  double gamma = 100.0;  // background blur scale, px
  double t = 0.05;       // threshold
  int tau = 500;         // min component size, px
  double nu = 0.85;      // min elongation

  void validate() const {
    if (gamma < 10) fail_usage("segment: gamma must be >= 10");
    if (t < 0 || t > 1) fail_usage("segment: t must be in [0,1]");
    if (tau < 0) fail_usage("segment: tau must be >= 0");
    if (nu < 0 || nu > 1) fail_usage("segment: nu must be in [0,1]");
  }
};

using BinaryMask = Image2D;  // values restricted to {0,1}

struct Component {
  std::vector<std::pair<int, int>> pixels;  // (x, y)
  long size = 0;
  double cx = 0, cy = 0;        // centroid
  double mxx = 0, mxy = 0, myy = 0;  // coordinate covariance
  double elongation = 0;        // 1 - sqrt(mu_min / mu_max), in [0,1]
};

// Background-subtracted strict threshold: mask = 1 where
// (V - gaussian_blur(V, gamma)) > t. The blur is periodic and mass
// preserving, so a constant map always yields an empty mask.
inline BinaryMask adaptive_threshold(const Image2D& v, double gamma, double t) {
  if (gamma < 10) fail_usage("adaptive_threshold: gamma must be >= 10");
  const int w = v.width, h = v.height;
  std::vector<cplx> buf(v.data.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = v.data[i];
  dft2_inplace(buf.data(), h, w, false);
  for (int y = 0; y < h; ++y) {
    double wy = kTwoPi * bin_freq(y, h);
    for (int x = 0; x < w; ++x) {
      double wx = kTwoPi * bin_freq(x, w);
      buf[static_cast<std::size_t>(y) * w + x] *=
          std::exp(-0.5 * gamma * gamma * (wx * wx + wy * wy));
    }
  }
  dft2_inplace(buf.data(), h, w, true);
  BinaryMask mask(w, h);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    mask.data[i] = (v.data[i] - buf[i].real() > t) ? 1.0 : 0.0;
  return mask;
}

// 8-connected component labeling (BFS) with second-moment statistics.
inline std::vector<Component> connected_components(const BinaryMask& mask) {
  const int w = mask.width, h = mask.height;
  std::vector<int> label(mask.data.size(), -1);
  std::vector<Component> comps;
  std::deque<std::pair<int, int>> queue;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      std::size_t idx0 = static_cast<std::size_t>(y0) * w + x0;
      if (mask.data[idx0] == 0.0 || label[idx0] >= 0) continue;
      int id = static_cast<int>(comps.size());
      comps.emplace_back();
      Component& c = comps.back();
      label[idx0] = id;
      queue.push_back({x0, y0});
      while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        c.pixels.push_back({x, y});
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (mask.data[nidx] == 0.0 || label[nidx] >= 0) continue;
            label[nidx] = id;
            queue.push_back({nx, ny});
          }
      }
      c.size = static_cast<long>(c.pixels.size());
      for (auto [x, y] : c.pixels) {
        c.cx += x;
        c.cy += y;
      }
      c.cx /= c.size;
      c.cy /= c.size;
      for (auto [x, y] : c.pixels) {
        double ex = x - c.cx, ey = y - c.cy;
        c.mxx += ex * ex;
        c.mxy += ex * ey;
        c.myy += ey * ey;
      }
      c.mxx /= c.size;
      c.mxy /= c.size;
      c.myy /= c.size;
      double tr = 0.5 * (c.mxx + c.myy);
      double det = std::sqrt(0.25 * (c.mxx - c.myy) * (c.mxx - c.myy) +
                             c.mxy * c.mxy);
      double mu_max = tr + det, mu_min = std::max(tr - det, 0.0);
      c.elongation = (mu_max > 0) ? 1.0 - std::sqrt(mu_min / mu_max) : 0.0;
    }
  return comps;
}

// Keep components with size >= tau and elongation >= nu; rasterize back.
inline BinaryMask filter_components(const std::vector<Component>& comps,
                                    int width, int height, int tau, double nu) {
  BinaryMask mask(width, height);
  for (const Component& c : comps) {
    if (c.size < tau || c.elongation < nu) continue;
    for (auto [x, y] : c.pixels) mask.at(x, y) = 1.0;
  }
  return mask;
}

// Full pipeline: vesselness -> adaptive threshold -> component filter.
inline BinaryMask segment(const Image2D& f, const VesselnessParams& vp,
                          const SegParams& sp, const KernelSet& ks) {
  sp.validate();
  VesselnessMap vm = (vp.variant == VesselVariant::Frangi2D)
                         ? frangi_multiscale(f, ks.scales, vp.sigma1,
                                             vp.sigma2_factor, vp.polarity)
                         : vesselness_sim2(f, vp, ks);
  BinaryMask th = adaptive_threshold(vm.map, sp.gamma, sp.t);
  auto comps = connected_components(th);
  return filter_components(comps, f.width, f.height, sp.tau, sp.nu);
}

}  // namespace oscore

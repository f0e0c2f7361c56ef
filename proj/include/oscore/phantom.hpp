#pragma once

#include <random>
#include <string>

#include "oscore/field.hpp"
#include "oscore/common.hpp"

namespace oscore {

enum class PhantomKind { XCrossing, StraightBar, CurvedVessel, GaussianRidge, Bifurcation };

struct PhantomParams {
  PhantomKind kind = PhantomKind::XCrossing;
  int width = 256;
  int height = 256;
  double bar_width = 4.0;     // px (full width; sigma for gaussian_ridge)
  double contrast = 0.5;      // depth of the dark structure below background 1.0
  double angle = kPi / 4;     // orientation of the primary bar (radians)
  double noise_std = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (width <= 0 || height <= 0) fail_usage("phantom: size must be positive");
    if (bar_width <= 0) fail_usage("phantom: bar width must be > 0");
    if (contrast < 0 || contrast > 1) fail_usage("phantom: contrast in [0,1]");
    if (noise_std < 0) fail_usage("phantom: noise std must be >= 0");
  }
};

namespace detail {

// anti-aliased bar coverage from signed distance to the centerline
inline double bar_coverage(double dist, double half_width) {
  double v = half_width + 0.5 - std::abs(dist);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace detail

inline PhantomKind phantom_kind_from_name(const std::string& s) {
  if (s == "x_crossing") return PhantomKind::XCrossing;
  if (s == "straight_bar") return PhantomKind::StraightBar;
  if (s == "curved_vessel") return PhantomKind::CurvedVessel;
  if (s == "gaussian_ridge") return PhantomKind::GaussianRidge;
  if (s == "bifurcation") return PhantomKind::Bifurcation;
  fail_usage("phantom: unknown kind '" + s + "'");
}

// Deterministic synthetic test images: bright background (1.0) with dark
// vessel-like structures of the given contrast. Bars are anti-aliased via
// distance-based pixel coverage.
inline Image2D make_phantom(const PhantomParams& p) {
  p.validate();
  Image2D img(p.width, p.height);
  const double cx = 0.5 * p.width, cy = 0.5 * p.height;
  const double hw = 0.5 * p.bar_width;
  const double c = std::cos(p.angle), s = std::sin(p.angle);

  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      double px = x - cx, py = y - cy;
      double cov = 0;
      switch (p.kind) {
        case PhantomKind::StraightBar: {
          double d = -s * px + c * py;  // signed distance to the axis line
          cov = detail::bar_coverage(d, hw);
          break;
        }
        case PhantomKind::XCrossing: {
          double d1 = -s * px + c * py;
          double d2 = c * px + s * py;  // perpendicular bar
          cov = std::max(detail::bar_coverage(d1, hw),
                         detail::bar_coverage(d2, hw));
          break;
        }
        case PhantomKind::CurvedVessel: {
          // circular arc through the image center
          double radius = 0.45 * std::min(p.width, p.height) * 2.0;
          double ox = cx, oy = cy + radius;
          double d = std::hypot(x - ox, y - oy) - radius;
          cov = detail::bar_coverage(d, hw);
          break;
        }
        case PhantomKind::GaussianRidge: {
          double d = -s * px + c * py;
          double sigma = p.bar_width;  // bar_width doubles as the ridge std
          cov = std::exp(-0.5 * d * d / (sigma * sigma));
          break;
        }
        case PhantomKind::Bifurcation: {
          // a trunk along +angle that splits into two branches at the center
          double along = c * px + s * py;
          double d0 = -s * px + c * py;
          if (along <= 0) {
            cov = detail::bar_coverage(d0, hw);
          } else {
            double a1 = p.angle + kPi / 6, a2 = p.angle - kPi / 6;
            double db1 = -std::sin(a1) * px + std::cos(a1) * py;
            double db2 = -std::sin(a2) * px + std::cos(a2) * py;
            cov = std::max(detail::bar_coverage(db1, hw),
                           detail::bar_coverage(db2, hw));
          }
          break;
        }
      }
      img.at(x, y) = 1.0 - p.contrast * cov;
    }
  }
  if (p.noise_std > 0) {
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> noise(0.0, p.noise_std);
    for (double& v : img.data) v += noise(rng);
  }
  return img;
}

}  // namespace oscore

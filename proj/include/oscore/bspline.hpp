#pragma once

#include "oscore/common.hpp"

namespace oscore {

// Centered cardinal B-spline of order k: support [-(k+1)/2, (k+1)/2],
// unit integral, partition of unity over integer shifts.
inline double bspline(int k, double x) {
  if (k == 0) {
    double ax = std::abs(x);
    if (ax < 0.5) return 1.0;
    if (ax == 0.5) return 0.5;
    return 0.0;
  }
  // Cox-de Boor recursion for the centered spline.
  double half = (k + 1) * 0.5;
  if (std::abs(x) >= half) return 0.0;
  return ((x + half) * bspline(k - 1, x + 0.5) +
          (half - x) * bspline(k - 1, x - 0.5)) /
         k;
}

}  // namespace oscore

#pragma once

#include <algorithm>
#include <cassert>
#include <numeric>

#include "oscore/common.hpp"

namespace oscore {

// Real-valued scalar field on a pixel grid, row-major, spacing 1 px.
struct Image2D {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image2D() = default;
  Image2D(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }

  bool finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double v) { return std::isfinite(v); });
  }
  double max_abs() const {
    double m = 0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
};

struct ComplexField2D {
  int width = 0;
  int height = 0;
  std::vector<cplx> data;

  ComplexField2D() = default;
  ComplexField2D(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}
  explicit ComplexField2D(const Image2D& img)
      : width(img.width), height(img.height), data(img.size()) {
    for (std::size_t i = 0; i < img.size(); ++i) data[i] = img.data[i];
  }

  cplx& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  cplx at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }

  Image2D real() const {
    Image2D out(width, height);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = data[i].real();
    return out;
  }
  bool finite() const {
    return std::all_of(data.begin(), data.end(), [](const cplx& v) {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
  }
};

inline double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}
inline double norm2(const std::vector<cplx>& v) {
  double s = 0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}
inline double norm2(const Image2D& f) { return norm2(f.data); }
inline double norm2(const ComplexField2D& f) { return norm2(f.data); }

inline double rel_l2_error(const Image2D& got, const Image2D& want) {
  assert(got.size() == want.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double d = got.data[i] - want.data[i];
    num += d * d;
    den += want.data[i] * want.data[i];
  }
  return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

// Complex field on orientation x space, plane-contiguous: index (t, y, x).
struct Field3D {
  int n_theta = 0;
  int height = 0;
  int width = 0;
  std::vector<cplx> data;

  Field3D() = default;
  Field3D(int nt, int h, int w)
      : n_theta(nt), height(h), width(w),
        data(static_cast<std::size_t>(nt) * h * w) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  cplx* plane(int t) { return data.data() + static_cast<std::size_t>(t) * plane_size(); }
  const cplx* plane(int t) const {
    return data.data() + static_cast<std::size_t>(t) * plane_size();
  }
  cplx& at(int t, int y, int x) { return plane(t)[static_cast<std::size_t>(y) * width + x]; }
  cplx at(int t, int y, int x) const {
    return plane(t)[static_cast<std::size_t>(y) * width + x];
  }
  bool finite() const {
    return std::all_of(data.begin(), data.end(), [](const cplx& v) {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
  }
};

// Real volume with the same (theta, y, x) layout; workhorse for the
// derivative/vesselness path which acts on Re(U) only.
struct RealField3D {
  int n_theta = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  RealField3D() = default;
  RealField3D(int nt, int h, int w, double fill = 0.0)
      : n_theta(nt), height(h), width(w),
        data(static_cast<std::size_t>(nt) * h * w, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  double* plane(int t) { return data.data() + static_cast<std::size_t>(t) * plane_size(); }
  const double* plane(int t) const {
    return data.data() + static_cast<std::size_t>(t) * plane_size();
  }
  double& at(int t, int y, int x) {
    return plane(t)[static_cast<std::size_t>(y) * width + x];
  }
  double at(int t, int y, int x) const {
    return plane(t)[static_cast<std::size_t>(y) * width + x];
  }
  double max_abs() const {
    double m = 0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
};

// Scale-major stack of Field3D planes: index (scale, theta, y, x).
struct Field4D {
  int n_scale = 0;
  int n_theta = 0;
  int height = 0;
  int width = 0;
  std::vector<cplx> data;

  Field4D() = default;
  Field4D(int ns, int nt, int h, int w)
      : n_scale(ns), n_theta(nt), height(h), width(w),
        data(static_cast<std::size_t>(ns) * nt * h * w) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  cplx* plane(int s, int t) {
    return data.data() + (static_cast<std::size_t>(s) * n_theta + t) * plane_size();
  }
  const cplx* plane(int s, int t) const {
    return data.data() + (static_cast<std::size_t>(s) * n_theta + t) * plane_size();
  }
  cplx& at(int s, int t, int y, int x) {
    return plane(s, t)[static_cast<std::size_t>(y) * width + x];
  }
  cplx at(int s, int t, int y, int x) const {
    return plane(s, t)[static_cast<std::size_t>(y) * width + x];
  }
};

}  // namespace oscore

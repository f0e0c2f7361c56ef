#pragma once

#include <memory>

#include "oscore/wavelets.hpp"

namespace oscore {

// Orientation score: n_orient complex planes over [0, pi). For real input the
// half circle determines the full circle via U(x, theta+pi) = conj U(x, theta).
struct OrientationScore {
  Field3D field;
  std::shared_ptr<const KernelSet> kernels;

  int n_orient() const { return field.n_theta; }
  double theta(int j) const { return kernels->theta(j); }
};

// Scale-orientation score: layer-major stack, layer 0 = finest scale; the
// merged residual layer (if any) sits at the end.
struct ScaleOrientationScore {
  Field4D field;
  std::vector<double> scales;  // active scales only
  bool has_residual = false;
  std::shared_ptr<const KernelSet> kernels;
};

namespace detail {

// One correlation plane: IDFT[ conj(Psi) * F ] with a real filter spectrum.
inline void correlate_plane(const Image2D& filter, const ComplexField2D& f_hat,
                            cplx* out) {
  const std::size_t n = f_hat.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = filter.data[i] * f_hat.data[i];
  dft2_inplace(out, f_hat.height, f_hat.width, true);
}

}  // namespace detail

// Forward transform of one layer of a (multi-scale) bank; returns the
// half-circle score planes. This is the streaming building block the
// vesselness pipeline uses so it never holds the whole 4D score.
inline Field3D forward_layer(const Image2D& f, const KernelSet& ks, int layer) {
  if (f.width != ks.width || f.height != ks.height)
    fail_usage("forward: image dims do not match the kernel set");
  if (!f.finite()) fail_numerical("forward: non-finite input");
  ComplexField2D f_hat(f);
  dft2_inplace(f_hat.data.data(), f.height, f.width, false);
  Field3D u(ks.n_orient(), f.height, f.width);
  parallel_for(ks.n_orient(), [&](std::size_t j) {
    Image2D filt = ks.make_filter(layer, static_cast<int>(j));
    detail::correlate_plane(filt, f_hat, u.plane(static_cast<int>(j)));
  });
  return u;
}

inline OrientationScore os_forward(const Image2D& f,
                                   std::shared_ptr<const KernelSet> kernels) {
  if (kernels->multiscale)
    fail_usage("os_forward expects a single-scale kernel set");
  OrientationScore score;
  score.field = forward_layer(f, *kernels, 0);
  score.kernels = std::move(kernels);
  return score;
}

// Exact reconstruction: sum of psi_theta * U over the full circle (realized
// via conjugate symmetry from the stored half circle), divided by M_psi in
// the Fourier domain. Fails if the bank is ill-posed in its own passband.
inline Image2D os_reconstruct_exact(const OrientationScore& score,
                                    double delta = 1e-3) {
  const KernelSet& ks = *score.kernels;
  const int w = ks.width, h = ks.height;
  if (score.field.n_theta != ks.n_orient())
    fail_usage("reconstruct: slice count does not match the kernel set");
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (ks.in_band(x, y) && ks.stability.at(x, y) < delta)
        fail_numerical("reconstruct: M_psi below delta in the passband");

  ComplexField2D acc(w, h);
  ComplexField2D u_hat(w, h);
  for (int j = 0; j < ks.n_orient(); ++j) {
    std::copy(score.field.plane(j), score.field.plane(j) + u_hat.size(),
              u_hat.data.begin());
    dft2_inplace(u_hat.data.data(), h, w, false);
    const Image2D& filt = ks.filters[j];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        std::size_t ni = detail::neg_index(x, y, w, h);
        // theta_j term plus its antipodal partner theta_j + pi:
        // F[U_{j+n}](w) = Psi_j(-w) conj(F[U_j](-w)) for real inputs.
        acc.data[i] += filt.data[i] * u_hat.data[i] +
                       filt.data[ni] * std::conj(u_hat.data[ni]);
      }
  }
  for (std::size_t i = 0; i < acc.size(); ++i)
    acc.data[i] /= std::max(ks.stability.data[i], delta);
  dft2_inplace(acc.data.data(), h, w, true);
  return acc.real();
}

inline ScaleOrientationScore sos_forward(const Image2D& f,
                                         std::shared_ptr<const KernelSet> kernels) {
  const KernelSet& ks = *kernels;
  if (!ks.multiscale) fail_usage("sos_forward expects a multi-scale kernel set");
  if (f.width != ks.width || f.height != ks.height)
    fail_usage("sos_forward: image dims do not match the kernel set");
  if (!f.finite()) fail_numerical("sos_forward: non-finite input");

  ScaleOrientationScore s;
  s.scales = ks.scales;
  s.has_residual = ks.has_residual;
  s.kernels = kernels;
  s.field = Field4D(ks.n_layers(), ks.n_orient(), f.height, f.width);

  ComplexField2D f_hat(f);
  dft2_inplace(f_hat.data.data(), f.height, f.width, false);
  for (int l = 0; l < ks.n_layers(); ++l) {
    parallel_for(ks.n_orient(), [&](std::size_t j) {
      Image2D filt = ks.make_filter(l, static_cast<int>(j));
      detail::correlate_plane(filt, f_hat, s.field.plane(l, static_cast<int>(j)));
    });
  }
  return s;
}

// Reconstruction by summation over scales and angles; with the M(omega)
// normalized bank the filters tile the covered band, so the plain sum
// (doubled real part for the stored half circle) recovers the image.
inline Image2D sos_reconstruct(const ScaleOrientationScore& s) {
  const KernelSet& ks = *s.kernels;
  if (ks.has_residual && s.field.n_scale != ks.n_layers())
    fail_usage("sos_reconstruct: score is missing the merged residual layer");
  if (s.field.n_scale != ks.n_layers())
    fail_usage("sos_reconstruct: layer count does not match the kernel set");
  Image2D out(s.field.width, s.field.height);
  const std::size_t ps = s.field.plane_size();
  for (int l = 0; l < s.field.n_scale; ++l)
    for (int j = 0; j < s.field.n_theta; ++j) {
      const cplx* p = s.field.plane(l, j);
      for (std::size_t i = 0; i < ps; ++i) out.data[i] += 2.0 * p[i].real();
    }
  return out;
}

}  // namespace oscore

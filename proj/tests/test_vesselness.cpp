#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oscore/vesselness.hpp"
#include "oscore/phantom.hpp"
#include "oscore/config.hpp"

using namespace oscore;

namespace {

GaugeFrameField single_voxel_gauge(double l1, double l2, double l3) {
  GaugeFrameField g;
  g.n_theta = 1;
  g.height = 1;
  g.width = 1;
  g.lam1 = RealField3D(1, 1, 1, l1);
  g.lam2 = RealField3D(1, 1, 1, l2);
  g.lam3 = RealField3D(1, 1, 1, l3);
  return g;
}

// torus rotation by 90 degrees, same convention as the score tests
Image2D rot90(const Image2D& f) {
  Image2D g(f.width, f.height);
  const int n = f.width;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) g.at((n - y) % n, x) = f.at(x, y);
  return g;
}

Image2D band_limit(const Image2D& f) {
  ComplexField2D s(f);
  dft2_inplace(s.data.data(), f.height, f.width, false);
  for (int y = 0; y < f.height; ++y) {
    double fy = bin_freq(y, f.height);
    for (int x = 0; x < f.width; ++x) {
      double fx = bin_freq(x, f.width);
      if (std::max(std::abs(fx), std::abs(fy)) > 0.45) s.at(x, y) = 0;
    }
  }
  dft2_inplace(s.data.data(), f.height, f.width, true);
  return s.real();
}

std::shared_ptr<const KernelSet> small_ms_kernels(int n, int n_active = 3) {
  MultiScaleParams mp;
  mp.n_active = n_active;
  CakeParams cp;
  return std::make_shared<const KernelSet>(build_ms_kernels(mp, cp, n, n));
}

double median(std::vector<double> v) {
  REQUIRE(!v.empty());
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("gauge measures follow the eigenvalue arithmetic") {
  MeasureFields m = measures_gauge(single_voxel_gauge(0, 2, 4));
  REQUIRE(m.R.data[0] == 0.0);
  REQUIRE(m.S.data[0] == 9.0);
  REQUIRE(m.Q.data[0] == 3.0);
}

TEST_CASE("zero eigenvalues give zero structure and a suppressed response") {
  MeasureFields m = measures_gauge(single_voxel_gauge(0, 0, 0));
  REQUIRE(m.S.data[0] == 0.0);
  REQUIRE(std::isinf(m.R.data[0]));  // guarded division, not NaN
  RealField3D v = vesselness_core(m, 0.5, 0.2);
  REQUIRE(v.data[0] == 0.0);
}

TEST_CASE("core response matches the closed forms") {
  MeasureFields m;
  m.R = RealField3D(1, 1, 4);
  m.S = RealField3D(1, 1, 4, 1.0);
  m.Q = RealField3D(1, 1, 4, 1.0);
  m.R.data[1] = 0.5 * std::sqrt(2.0);
  m.Q.data[2] = -1.0;
  m.R.data[3] = detail::kInfR;
  RealField3D v = vesselness_core(m, 0.5, 0.2);
  const double s_term = 1.0 - std::exp(-12.5);
  REQUIRE(v.data[0] == Catch::Approx(s_term).margin(1e-12));   // R = 0, S = max
  REQUIRE(v.data[1] == Catch::Approx(std::exp(-1.0) * s_term).margin(1e-12));
  REQUIRE(v.data[2] == 0.0);  // Q <= 0 kills the voxel outright
  REQUIRE(v.data[3] == 0.0);  // guarded-division sentinel
  REQUIRE(std::abs(v.data[0] - 1.0) < 1e-4);
}

TEST_CASE("negative convexity is a bitwise zero across a million random voxels") {
  const std::size_t n = 1u << 20;
  MeasureFields m;
  m.R = RealField3D(1, 1024, 1024);
  m.S = RealField3D(1, 1024, 1024);
  m.Q = RealField3D(1, 1024, 1024);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0, 3);
  for (std::size_t i = 0; i < n; ++i) {
    m.R.data[i] = g(rng);
    m.S.data[i] = std::abs(g(rng)) + 1e-6;
    double q = -std::abs(g(rng));
    if (i % 97 == 0) q = 0.0;
    if (i % 131 == 0) q = std::numeric_limits<double>::quiet_NaN();
    m.Q.data[i] = q;
  }
  RealField3D v = vesselness_core(m, 0.5, 0.2);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (v.data[i] != 0.0 || std::signbit(v.data[i])) ++nonzero;
  REQUIRE(nonzero == 0);
}

TEST_CASE("flat structure yields an all-zero layer") {
  MeasureFields m;
  m.R = RealField3D(1, 8, 8);
  m.S = RealField3D(1, 8, 8);  // S = 0 everywhere
  m.Q = RealField3D(1, 8, 8, 1.0);
  RealField3D v = vesselness_core(m, 0.5, 0.2);
  for (double x : v.data) REQUIRE(x == 0.0);
}

TEST_CASE("core rejects bad sensitivity parameters") {
  MeasureFields m;
  m.R = RealField3D(1, 1, 1);
  m.S = RealField3D(1, 1, 1);
  m.Q = RealField3D(1, 1, 1);
  REQUIRE_THROWS_AS(vesselness_core(m, 0.0, 0.2), Error);
  REQUIRE_THROWS_AS(vesselness_core(m, 0.5, 0.0), Error);
}

TEST_CASE("xi-eta measures recognize an aligned vessel and reject the orthogonal slice") {
  const int n = 128;
  CakeParams cp;
  auto ks = std::make_shared<const KernelSet>(build_cake_kernels(cp, n, n));
  PhantomParams pp;
  pp.kind = PhantomKind::StraightBar;
  pp.width = pp.height = n;
  pp.angle = 0;
  pp.bar_width = 4;
  Image2D f = make_phantom(pp);
  OrientationScore u = os_forward(f, ks);
  MeasureFields m = measures_xi_eta(u, Se2Params{0.05 / 3.8, 1.9});
  const std::size_t ps = m.R.plane_size();
  int aligned_ok = 0, ortho_ok = 0, count = 0;
  for (int x = 24; x < n - 24; ++x) {
    std::size_t i = std::size_t(n / 2) * n + x;
    ++count;
    if (m.Q.plane(0)[i] > 0 && std::abs(m.R.plane(0)[i]) < 0.2) ++aligned_ok;
    double rq = m.Q.plane(6)[i], rr = m.R.plane(6)[i];
    if (rq <= 0 || std::abs(rr) >= 1) ++ortho_ok;
  }
  (void)ps;
  REQUIRE(aligned_ok == count);
  REQUIRE(ortho_ok == count);
}

TEST_CASE("constant image gives a zero vesselness map") {
  const int n = 64;
  auto ks = small_ms_kernels(n, 2);
  Image2D f(n, n, 0.5);
  VesselnessParams vp;
  VesselnessMap vm = vesselness_sim2(f, vp, *ks);
  for (double v : vm.map.data) REQUIRE(v == 0.0);

  VesselnessMap fr = frangi_multiscale(f, {1.5, 3.8}, 0.5, 0.2,
                                       Polarity::DarkVessels);
  for (double v : fr.map.data) REQUIRE(v == 0.0);
}

TEST_CASE("vesselness is invariant to a global contrast factor") {
  const int n = 96;
  auto ks = small_ms_kernels(n);
  PhantomParams pp;
  pp.kind = PhantomKind::XCrossing;
  pp.width = pp.height = n;
  pp.angle = 0;
  Image2D f = make_phantom(pp);
  Image2D fa = f;
  for (double& v : fa.data) v *= 2.5;
  VesselnessParams vp;
  VesselnessMap a = vesselness_sim2(f, vp, *ks);
  VesselnessMap b = vesselness_sim2(fa, vp, *ks);
  double worst = 0;
  for (std::size_t i = 0; i < a.map.size(); ++i)
    worst = std::max(worst, std::abs(a.map.data[i] - b.map.data[i]));
  REQUIRE(worst < 1e-8);

  // range contract: [0, 1] with the max attained
  double mx = 0;
  for (double v : a.map.data) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    mx = std::max(mx, v);
  }
  REQUIRE(mx == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("gauge vesselness preserves the crossing where Frangi dips") {
  const int n = 128;
  MultiScaleParams mp;  // full five-scale bank
  CakeParams cp;
  auto ks = std::make_shared<const KernelSet>(build_ms_kernels(mp, cp, n, n));
  PhantomParams pp;
  pp.kind = PhantomKind::XCrossing;
  pp.width = pp.height = n;
  pp.angle = 0;  // horizontal + vertical bars, centerlines on the mid axes
  pp.bar_width = 4;
  pp.contrast = 0.5;
  pp.noise_std = 0.02;
  Image2D f = make_phantom(pp);

  VesselnessParams vp;
  vp.variant = VesselVariant::Gauge;
  VesselnessMap gauge = vesselness_sim2(f, vp, *ks);
  VesselnessMap frangi = frangi_multiscale(
      f, PipelineConfig::active_scales(mp), vp.sigma1, vp.sigma2_factor,
      Polarity::DarkVessels);

  const int c = n / 2, margin = 16, excl = 8;
  auto centerline = [&](const Image2D& map) {
    std::vector<double> v;
    for (int x = margin; x < n - margin; ++x) {
      if (std::abs(x - c) <= excl) continue;  // keep the crossing itself out
      v.push_back(map.at(x, c));
      v.push_back(map.at(c, x));
    }
    return v;
  };

  double g_cross = gauge.map.at(c, c);
  double g_line = median(centerline(gauge.map));
  REQUIRE(g_cross >= 0.5 * g_line);

  double f_cross = frangi.map.at(c, c);
  double f_line = median(centerline(frangi.map));
  REQUIRE(f_cross < g_cross);       // crossing preservation vs the baseline
  REQUIRE(f_cross < 0.5 * f_line);  // the baseline's dip is real
}

TEST_CASE("gauge frame tracks a curved vessel at least as well as the fixed frame") {
  const int n = 128;
  auto ks = small_ms_kernels(n);
  PhantomParams pp;
  pp.kind = PhantomKind::CurvedVessel;
  pp.width = pp.height = n;
  pp.bar_width = 4;
  Image2D f = make_phantom(pp);

  VesselnessParams vp;
  vp.variant = VesselVariant::Gauge;
  VesselnessMap g = vesselness_sim2(f, vp, *ks);
  vp.variant = VesselVariant::XiEta;
  VesselnessMap x = vesselness_sim2(f, vp, *ks);

  // vessel pixels from the clean phantom geometry
  std::vector<double> gv, xv;
  for (int yy = 16; yy < n - 16; ++yy)
    for (int xx = 16; xx < n - 16; ++xx)
      if (f.at(xx, yy) < 1.0 - 0.5 * pp.contrast) {
        gv.push_back(g.map.at(xx, yy));
        xv.push_back(x.map.at(xx, yy));
      }
  REQUIRE(median(gv) >= median(xv) * 0.98);
}

TEST_CASE("Frangi peaks at the layer matching the ridge width") {
  const int n = 128;
  PhantomParams pp;
  pp.kind = PhantomKind::GaussianRidge;
  pp.width = pp.height = n;
  pp.bar_width = 3.8;  // ridge std in px
  pp.angle = 0;
  Image2D f = make_phantom(pp);
  std::vector<double> scales{1.5, 2.4, 3.8, 6.0, 9.5};
  FrangiDiagnostics diag;
  frangi_multiscale(f, scales, 0.5, 0.2, Polarity::DarkVessels, &diag);
  REQUIRE(diag.per_scale_max_abs_l2.size() == scales.size());
  std::size_t best = std::max_element(diag.per_scale_max_abs_l2.begin(),
                                      diag.per_scale_max_abs_l2.end()) -
                     diag.per_scale_max_abs_l2.begin();
  REQUIRE(std::abs(int(best) - 2) <= 1);
}

TEST_CASE("Frangi rejects non-increasing scale lists") {
  Image2D f(64, 64, 0.5);
  REQUIRE_THROWS_AS(frangi_multiscale(f, {3.8, 1.5}, 0.5, 0.2,
                                      Polarity::DarkVessels),
                    Error);
  REQUIRE_THROWS_AS(frangi_multiscale(f, {}, 0.5, 0.2, Polarity::DarkVessels),
                    Error);
}

TEST_CASE("bright-vessel polarity mirrors the dark-vessel response") {
  const int n = 96;
  auto ks = small_ms_kernels(n);
  PhantomParams pp;
  pp.kind = PhantomKind::StraightBar;
  pp.width = pp.height = n;
  pp.angle = 0;
  Image2D dark = make_phantom(pp);
  Image2D bright(n, n);
  for (std::size_t i = 0; i < dark.size(); ++i) bright.data[i] = -dark.data[i];
  VesselnessParams vp;
  VesselnessMap a = vesselness_sim2(dark, vp, *ks);
  vp.polarity = Polarity::BrightVessels;
  VesselnessMap b = vesselness_sim2(bright, vp, *ks);
  double worst = 0;
  for (std::size_t i = 0; i < a.map.size(); ++i)
    worst = std::max(worst, std::abs(a.map.data[i] - b.map.data[i]));
  REQUIRE(worst < 1e-10);
}

TEST_CASE("vesselness commutes with quarter-turn rotation away from the border") {
  const int n = 96;
  auto ks = small_ms_kernels(n);
  PhantomParams pp;
  pp.kind = PhantomKind::StraightBar;
  pp.width = pp.height = n;
  pp.angle = kPi / 6;
  pp.bar_width = 4;
  Image2D f = band_limit(make_phantom(pp));
  Image2D fr = rot90(f);
  VesselnessParams vp;
  VesselnessMap a = vesselness_sim2(f, vp, *ks);
  VesselnessMap b = vesselness_sim2(fr, vp, *ks);
  Image2D ar = rot90(a.map);
  double worst = 0, ref = a.map.max_abs();
  for (int y = 16; y < n - 16; ++y)
    for (int x = 16; x < n - 16; ++x)
      worst = std::max(worst, std::abs(ar.at(x, y) - b.map.at(x, y)));
  REQUIRE(worst < 0.02 * ref);
}

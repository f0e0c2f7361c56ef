// Acceptance checks for the orientation-score vessel filtering pipeline.
// Each numbered criterion prints one PASS/FAIL/SKIP line; the process exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "oscore/oscore.hpp"

using namespace oscore;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << num << ": "
            << name << " (" << detail << ")" << std::endl;
  if (!pass) ++g_failures;
}

void report_skip(int num, const std::string& name, const std::string& why) {
  std::cout << "[SKIP] criterion " << num << ": " << name << " (" << why << ")"
            << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

// textured patch: band-limited noise plus an oriented structure, a stand-in
// for a natural-image crop with energy across the passband
Image2D textured_patch(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  ComplexField2D spec(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double rho = std::hypot(bin_freq(x, n), bin_freq(y, n));
      spec.at(x, y) = cplx(g(rng), g(rng)) * std::exp(-40.0 * rho * rho);
    }
  dft2_inplace(spec.data.data(), n, n, true);
  Image2D f = spec.real();
  double mx = f.max_abs();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      f.at(x, y) = 0.5 + 0.4 * f.at(x, y) / mx;
      double d = (x - y) / std::sqrt(2.0);
      f.at(x, y) -= 0.3 * std::exp(-0.5 * d * d / 9.0);
    }
  return f;
}

// fundus-like crop: smooth illumination field with dark curved vessels and
// mild sensor noise
Image2D fundus_like(int n, unsigned seed) {
  Image2D f(n, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 0.01);
  const double cx = 0.5 * n, cy = 0.5 * n;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double r2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (n * n);
      double v = 0.75 - 0.25 * r2;  // vignetting-style background
      for (int k = 0; k < 3; ++k) {
        // circular-arc vessels of different radii and widths
        double rad = 0.22 * n * (k + 1);
        double w = 2.0 + 1.8 * k;
        double d = std::hypot(x - cx, y - cy + 0.1 * n * k) - rad;
        v -= 0.3 * std::clamp(0.5 * w + 0.5 - std::abs(d), 0.0, 1.0);
      }
      f.at(x, y) = v + g(rng);
    }
  return f;
}

Image2D rot90(const Image2D& f) {
  Image2D g(f.width, f.height);
  const int n = f.width;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) g.at((n - y) % n, x) = f.at(x, y);
  return g;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

OrientationScore theta_independent_wave(int n, int nt, int kx, int ky) {
  OrientationScore u;
  u.field = Field3D(nt, n, n);
  for (int t = 0; t < nt; ++t) {
    cplx* pl = u.field.plane(t);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        pl[std::size_t(y) * n + x] =
            std::sin(kTwoPi * (double(kx) * x + double(ky) * y) / n);
  }
  return u;
}

BinaryMask random_mask(int n, std::mt19937_64& rng, double p) {
  BinaryMask m(n, n);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& v : m.data) v = (u(rng) < p) ? 1.0 : 0.0;
  return m;
}

void criterion_1() {
  const int n = 256;
  Image2D f = textured_patch(n, 11);
  CakeParams cp;
  auto t0 = std::chrono::steady_clock::now();
  auto ks = std::make_shared<const KernelSet>(build_cake_kernels(cp, n, n));
  OrientationScore u = os_forward(f, ks);
  Image2D back = os_reconstruct_exact(u);
  double dt = seconds_since(t0);
  double err = rel_l2_error(back, f);
  report(1, "single-scale roundtrip at 256^2", err < 1e-2 && dt < 5.0,
         "rel_err=" + fmt(err) + ", time=" + fmt(dt) + "s");
}

void criterion_2() {
  CakeParams cp;
  KernelSet ks = build_cake_kernels(cp, 256, 256);
  double worst = 0;
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x)
      if (ks.in_band(x, y))
        worst = std::max(worst, std::abs(ks.stability.at(x, y) - 1.0));

  // multi-scale: normalized recombination (filters plus antipodal partners)
  MultiScaleParams mp;
  const int n = 128;
  KernelSet ms = build_ms_kernels(mp, cp, n, n);
  Image2D recomb(n, n);
  for (int l = 0; l < ms.n_layers(); ++l)
    for (int j = 0; j < ms.n_orient(); ++j) {
      Image2D filt = ms.make_filter(l, j);
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          recomb.at(x, y) +=
              filt.at(x, y) + filt.data[detail::neg_index(x, y, n, n)];
    }
  double worst_ms = 0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (ms.in_band(x, y) &&
          std::hypot(bin_freq(x, n), bin_freq(y, n)) <= 0.8 * kNyquist)
        worst_ms = std::max(worst_ms, std::abs(recomb.at(x, y) - 1.0));

  report(2, "stability map flat in band", worst < 0.1 && worst_ms < 1e-6,
         "max|M-1|=" + fmt(worst) + ", ms recomb dev=" + fmt(worst_ms));
}

void criterion_3() {
  const int n = 512;
  Image2D f = fundus_like(n, 13);
  MultiScaleParams mp;  // five active scales plus merged residual
  CakeParams cp;
  auto ks = std::make_shared<const KernelSet>(build_ms_kernels(mp, cp, n, n));
  ScaleOrientationScore s = sos_forward(f, ks);
  Image2D back = sos_reconstruct(s);
  double err = rel_l2_error(back, f);
  report(3, "multi-scale roundtrip at 512^2", err < 2e-2, "rel_err=" + fmt(err));
}

void criterion_4() {
  CakeParams cp;
  MultiScaleParams mp;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uphi(0, kTwoPi);
  double worst_ang = 0;
  for (int i = 0; i < 1000; ++i) {
    double phi = uphi(rng);
    double sum = 0;
    for (int j = 0; j < cp.n_theta_full(); ++j)
      sum += angular_part(cp, phi - j * cp.s_theta(), 0.3);
    worst_ang = std::max(worst_ang, std::abs(sum - 1.0));
  }
  double rho_lo = kScaleToFreq / mp.scale(mp.n_rho - 2);
  double rho_hi = kScaleToFreq / mp.scale(1);
  std::uniform_real_distribution<double> ur(std::log(rho_lo), std::log(rho_hi));
  double worst_rad = 0;
  for (int i = 0; i < 1000; ++i) {
    MsEnvelope e = ms_radial_envelope(mp, 3, std::exp(ur(rng)));
    worst_rad = std::max(worst_rad, std::abs(e.sum - 1.0));
  }
  report(4, "partition-of-unity suites", worst_ang < 1e-12 && worst_rad < 1e-12,
         "angular dev=" + fmt(worst_ang) + ", radial dev=" + fmt(worst_rad));
}

void criterion_5() {
  const int n = 64, nt = 12;
  OrientationScore u = theta_independent_wave(n, nt, 2, 1);
  Se2Params p{0.05, 2.0};
  OrientationScore sm = regularize(u, p);

  // first order: frame derivative vs rotated central differences
  RealField3D dxi = li_derivative(u, p, {Axis::Xi});
  double worst1 = 0, ref1 = 0;
  for (int t = 0; t < nt; ++t) {
    double c = std::cos(t * kPi / nt), s = std::sin(t * kPi / nt);
    const cplx* pl = sm.field.plane(t);
    const double* d = dxi.plane(t);
    auto at = [&](int xx, int yy) {
      return pl[std::size_t((yy + n) % n) * n + (xx + n) % n].real();
    };
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        double fd = c * (at(x + 1, y) - at(x - 1, y)) / 2 +
                    s * (at(x, y + 1) - at(x, y - 1)) / 2;
        worst1 = std::max(worst1, std::abs(d[std::size_t(y) * n + x] - fd));
        ref1 = std::max(ref1, std::abs(fd));
      }
  }

  // second order, checked on the axis-aligned slices where xi is a grid axis
  RealField3D dxx = li_derivative(u, p, {Axis::Xi, Axis::Xi});
  double worst2 = 0, ref2 = 0;
  for (int t : {0, nt / 2}) {
    const cplx* pl = sm.field.plane(t);
    const double* d = dxx.plane(t);
    auto at = [&](int xx, int yy) {
      return pl[std::size_t((yy + n) % n) * n + (xx + n) % n].real();
    };
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        double fd = (t == 0)
                        ? at(x + 1, y) - 2 * at(x, y) + at(x - 1, y)
                        : at(x, y + 1) - 2 * at(x, y) + at(x, y - 1);
        worst2 = std::max(worst2, std::abs(d[std::size_t(y) * n + x] - fd));
        ref2 = std::max(ref2, std::abs(fd));
      }
  }

  // commutator identity on the same score
  RealField3D tx = li_derivative(u, p, {Axis::Theta, Axis::Xi});
  RealField3D xt = li_derivative(u, p, {Axis::Xi, Axis::Theta});
  RealField3D eta = li_derivative(u, p, {Axis::Eta});
  double worst_c = 0, ref_c = 0;
  for (std::size_t i = 0; i < eta.data.size(); ++i) {
    worst_c =
        std::max(worst_c, std::abs((xt.data[i] - tx.data[i]) - eta.data[i]));
    ref_c = std::max(ref_c, std::abs(eta.data[i]));
  }

  bool ok = worst1 < 0.01 * ref1 && worst2 < 0.01 * ref2 &&
            worst_c < 0.05 * ref_c;
  report(5, "derivatives vs finite differences + commutator", ok,
         "fd1=" + fmt(worst1 / ref1) + ", fd2=" + fmt(worst2 / ref2) +
             ", comm=" + fmt(worst_c / ref_c));
}

void criterion_6() {
  const std::size_t n = 1000000;
  MeasureFields m;
  m.R = RealField3D(1, 1000, 1000);
  m.S = RealField3D(1, 1000, 1000);
  m.Q = RealField3D(1, 1000, 1000);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 2);
  for (std::size_t i = 0; i < n; ++i) {
    m.R.data[i] = g(rng);
    m.S.data[i] = std::abs(g(rng)) + 1e-9;
    m.Q.data[i] = (i % 89 == 0) ? 0.0 : -std::abs(g(rng));
  }
  RealField3D v = vesselness_core(m, 0.5, 0.2);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (v.data[i] != 0.0 || std::signbit(v.data[i])) ++bad;
  report(6, "hard zero for non-convex voxels", bad == 0,
         "violations=" + std::to_string(bad) + "/1000000");
}

void criterion_7() {
  const int n = 256;
  PhantomParams pp;
  pp.kind = PhantomKind::XCrossing;
  pp.width = pp.height = n;
  pp.angle = 0;  // 90-degree crossing on the pixel axes
  pp.bar_width = 4;
  pp.contrast = 0.5;
  pp.noise_std = 0.02;
  pp.seed = 7;
  Image2D f = make_phantom(pp);

  MultiScaleParams mp;
  CakeParams cp;
  auto t0 = std::chrono::steady_clock::now();
  KernelSet ks = build_ms_kernels(mp, cp, n, n);
  VesselnessParams vp;  // gauge variant
  VesselnessMap gauge = vesselness_sim2(f, vp, ks);
  double dt = seconds_since(t0);
  VesselnessMap frangi =
      frangi_multiscale(f, PipelineConfig::active_scales(mp), vp.sigma1,
                        vp.sigma2_factor, Polarity::DarkVessels);

  const int c = n / 2;
  std::vector<double> line;
  for (int x = 16; x < n - 16; ++x) {
    if (std::abs(x - c) <= 8) continue;
    line.push_back(gauge.map.at(x, c));
    line.push_back(gauge.map.at(c, x));
  }
  double cross = gauge.map.at(c, c);
  double med = median(line);
  double fr = frangi.map.at(c, c);
  bool ok = cross >= 0.5 * med && cross > fr && dt < 30.0;
  report(7, "crossing preservation on the X-phantom", ok,
         "crossing=" + fmt(cross) + ", centerline med=" + fmt(med) +
             ", frangi=" + fmt(fr) + ", time=" + fmt(dt) + "s");
}

void criterion_8() {
  const int n = 128;
  PhantomParams pp;
  pp.kind = PhantomKind::XCrossing;
  pp.width = pp.height = n;
  pp.angle = kPi / 6;
  pp.bar_width = 4;
  pp.contrast = 0.5;
  Image2D centered = make_phantom(pp);
  // a centered perpendicular X is itself invariant under the quarter turn,
  // which would make this check vacuous; shift it off the rotation center
  Image2D f(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      f.at(x, y) = centered.at((x + n - 17) % n, (y + n - 5) % n);
  Image2D fr = rot90(f);

  MultiScaleParams mp;
  mp.n_active = 3;
  CakeParams cp;
  KernelSet ks = build_ms_kernels(mp, cp, n, n);
  VesselnessParams vp;
  VesselnessMap a = vesselness_sim2(f, vp, ks);
  VesselnessMap b = vesselness_sim2(fr, vp, ks);
  Image2D ar = rot90(a.map);
  double worst = 0, ref = a.map.max_abs();
  for (int y = 16; y < n - 16; ++y)
    for (int x = 16; x < n - 16; ++x)
      worst = std::max(worst, std::abs(ar.at(x, y) - b.map.at(x, y)));
  report(8, "quarter-turn equivariance of vesselness", worst < 0.02 * ref,
         "max dev=" + fmt(worst / ref) + " rel, limit 0.02");
}

void criterion_9() {
  const char* root = std::getenv("HRF_ROOT");
  if (!root) {
    report_skip(9, "retinal dataset reproduction",
                "HRF_ROOT not set; dataset not bundled, no network access");
    return;
  }
  try {
    auto records = ingest_hrf(root);
    const EvalRecord* rec = nullptr;
    for (const auto& r : records)
      if (r.id == "01_h") rec = &r;
    if (!rec) {
      report(9, "retinal dataset reproduction", false,
             "record 01_h not found under HRF_ROOT");
      return;
    }
    auto t0 = std::chrono::steady_clock::now();
    Image2D f = load_image(rec->image_path, Channel::Green);
    BinaryMask gt = load_mask(rec->gt_path);
    BinaryMask fov = load_mask(rec->fov_path);
    MultiScaleParams mp;
    CakeParams cp;
    KernelSet ks = build_ms_kernels(mp, cp, f.width, f.height);
    VesselnessParams vp;
    SegParams sp;  // paper defaults, t = 0.05
    VesselnessMap vm = vesselness_sim2(f, vp, ks);
    BinaryMask th = adaptive_threshold(vm.map, sp.gamma, sp.t);
    BinaryMask pred = filter_components(connected_components(th), f.width,
                                        f.height, sp.tau, sp.nu);
    Metrics m = confusion(pred, gt, fov);
    double dt = seconds_since(t0);
    bool ok = std::abs(m.accuracy - 0.969) <= 0.03 &&
              std::abs(m.sensitivity - 0.786) <= 0.10 && dt < 900.0;
    report(9, "retinal dataset reproduction", ok,
           "acc=" + fmt(m.accuracy) + " (target 0.969±0.03), se=" +
               fmt(m.sensitivity) + " (target 0.786±0.10), time=" + fmt(dt) +
               "s");
  } catch (const std::exception& e) {
    report(9, "retinal dataset reproduction", false, e.what());
  }
}

void criterion_10() {
  const int n = 128;
  PhantomParams pp;
  pp.kind = PhantomKind::GaussianRidge;
  pp.width = pp.height = n;
  pp.bar_width = 3.8;
  pp.angle = 0;
  Image2D f = make_phantom(pp);
  std::vector<double> scales{1.5, 2.4, 3.8, 6.0, 9.5};
  FrangiDiagnostics diag;
  frangi_multiscale(f, scales, 0.5, 0.2, Polarity::DarkVessels, &diag);
  std::size_t best = std::max_element(diag.per_scale_max_abs_l2.begin(),
                                      diag.per_scale_max_abs_l2.end()) -
                     diag.per_scale_max_abs_l2.begin();
  report(10, "Frangi scale selection on a 3.8 px ridge",
         std::abs(int(best) - 2) <= 1,
         "argmax layer=" + std::to_string(best) + " (scale " +
             fmt(scales[best]) + " px)");
}

void criterion_11() {
  std::mt19937_64 rng(11);
  bool ok = true;
  std::string why = "all checks held";
  for (int trial = 0; trial < 100 && ok; ++trial) {
    BinaryMask pred = random_mask(32, rng, 0.5);
    BinaryMask gt = random_mask(32, rng, 0.5);
    BinaryMask fov = random_mask(32, rng, 0.8);
    long fov_px = 0;
    for (double v : fov.data) fov_px += (v != 0.0);
    if (fov_px == 0) continue;
    Metrics m = confusion(pred, gt, fov);
    if (m.tp + m.fp + m.tn + m.fn != fov_px) {
      ok = false;
      why = "count conservation violated";
    }
  }
  BinaryMask gt = random_mask(32, rng, 0.4);
  BinaryMask fov(32, 32, 1.0);
  Metrics same = confusion(gt, gt, fov);
  BinaryMask inv(32, 32);
  for (std::size_t i = 0; i < gt.size(); ++i) inv.data[i] = 1.0 - gt.data[i];
  Metrics opp = confusion(inv, gt, fov);
  Metrics none = confusion(BinaryMask(32, 32), gt, fov);
  long vessels = 0;
  for (double v : gt.data) vessels += (v != 0.0);
  if (!(same.sensitivity == 1.0 && same.specificity == 1.0 &&
        same.accuracy == 1.0 && opp.sensitivity == 0.0 &&
        opp.specificity == 0.0 && none.sensitivity == 0.0 &&
        none.specificity == 1.0 &&
        none.accuracy == double(32 * 32 - vessels) / (32 * 32))) {
    ok = false;
    why = "closed-form case mismatch";
  }
  report(11, "confusion metric arithmetic", ok, why);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed (skips noted above)" << std::endl;
  return 0;
}

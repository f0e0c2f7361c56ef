// osvessel: command-line driver for orientation-score vessel filtering.
//
// Subcommands: kernels, score, reconstruct, vesselness, segment, evaluate,
// phantom, render. Exit codes: 0 ok, 1 usage error, 2 I/O error,
// 3 numerical failure.

#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "oscore/oscore.hpp"

namespace {

using namespace oscore;

std::shared_ptr<const KernelSet> make_kernels(const PipelineConfig& cfg, int w,
                                              int h, bool multiscale) {
  if (multiscale)
    return std::make_shared<const KernelSet>(
        build_ms_kernels(cfg.ms, cfg.cake, w, h));
  return std::make_shared<const KernelSet>(build_cake_kernels(cfg.cake, w, h));
}

VesselVariant parse_variant(const std::string& v) {
  if (v == "gauge") return VesselVariant::Gauge;
  if (v == "xi-eta") return VesselVariant::XiEta;
  if (v == "frangi") return VesselVariant::Frangi2D;
  fail_usage("unknown variant '" + v + "'");
}

std::vector<double> active_scales(const KernelSet& ks) { return ks.scales; }

Image2D montage(const NdFieldDump& d) {
  // per-theta (and per-scale) tiles of |value|, max-normalized
  int tiles = std::max(1, d.n_theta) * std::max(1, d.n_scales);
  int cols = static_cast<int>(std::ceil(std::sqrt(double(tiles))));
  int rows = (tiles + cols - 1) / cols;
  Image2D out(cols * d.width, rows * d.height);
  const std::size_t plane = static_cast<std::size_t>(d.width) * d.height;
  double mx = 0;
  std::vector<double> mag(d.is_complex ? d.raw.size() / 2 : d.raw.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    mag[i] = d.is_complex ? std::hypot(d.raw[2 * i], d.raw[2 * i + 1])
                          : std::abs(double(d.raw[i]));
    mx = std::max(mx, mag[i]);
  }
  if (mx == 0) mx = 1;
  for (int tdx = 0; tdx < tiles; ++tdx) {
    int tx = (tdx % cols) * d.width, ty = (tdx / cols) * d.height;
    for (int y = 0; y < d.height; ++y)
      for (int x = 0; x < d.width; ++x)
        out.at(tx + x, ty + y) = mag[tdx * plane + y * d.width + x] / mx;
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"orientation-score vessel filtering"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON pipeline configuration");

  // ---- kernels ----
  auto* sc_kernels = app.add_subcommand(
      "kernels", "build a kernel set and dump diagnostics");
  int kw = 256, kh = 256;
  bool k_multi = false;
  std::string k_out = "kernels.ndfield";
  sc_kernels->add_option("--width", kw);
  sc_kernels->add_option("--height", kh);
  sc_kernels->add_flag("--multiscale", k_multi);
  sc_kernels->add_option("-o,--output", k_out, "stability map dump");

  // ---- score ----
  auto* sc_score =
      app.add_subcommand("score", "forward orientation score transform");
  std::string s_in, s_out = "score.ndfield";
  bool s_multi = false;
  sc_score->add_option("-i,--input", s_in)->required();
  sc_score->add_option("-o,--output", s_out);
  sc_score->add_flag("--multiscale", s_multi);

  // ---- reconstruct ----
  auto* sc_rec = app.add_subcommand(
      "reconstruct", "invert a score dump and report the roundtrip error");
  std::string r_in, r_score, r_out = "reconstructed.png";
  sc_rec->add_option("-i,--input", r_in, "original image (for the error report)")
      ->required();
  sc_rec->add_option("--score", r_score, "score dump")->required();
  sc_rec->add_option("-o,--output", r_out);

  // ---- vesselness ----
  auto* sc_ves = app.add_subcommand("vesselness", "multi-scale vesselness map");
  std::string v_in, v_out = "vesselness.png", v_dump, v_variant = "gauge",
              v_polarity = "dark";
  std::vector<double> v_scales;
  double v_cbeta = -1, v_sigma1 = -1, v_sigma2f = -1;
  int v_norient = 0;
  sc_ves->add_option("-i,--input", v_in)->required();
  sc_ves->add_option("-o,--output", v_out);
  sc_ves->add_option("--dump", v_dump, "also write an ndfield dump");
  sc_ves->add_option("--variant", v_variant, "gauge | xi-eta | frangi");
  sc_ves->add_option("--scales", v_scales);
  sc_ves->add_option("--c-beta", v_cbeta);
  sc_ves->add_option("--n-orient", v_norient);
  sc_ves->add_option("--sigma1", v_sigma1);
  sc_ves->add_option("--sigma2-factor", v_sigma2f);
  sc_ves->add_option("--polarity", v_polarity, "dark | bright");

  // ---- segment ----
  auto* sc_seg = app.add_subcommand("segment", "binary vessel mask");
  std::string g_in, g_out = "mask.png", g_variant = "gauge", g_vmap;
  double g_t = -1, g_gamma = -1, g_nu = -1;
  int g_tau = -1;
  sc_seg->add_option("-i,--input", g_in)->required();
  sc_seg->add_option("-o,--output", g_out);
  sc_seg->add_option("--vesselness", g_vmap,
                     "precomputed vesselness dump (skips the transform)");
  sc_seg->add_option("--t", g_t);
  sc_seg->add_option("--gamma", g_gamma);
  sc_seg->add_option("--tau", g_tau);
  sc_seg->add_option("--nu", g_nu);
  sc_seg->add_option("--variant", g_variant);

  // ---- evaluate ----
  auto* sc_eval = app.add_subcommand("evaluate", "metrics vs ground truth");
  std::string e_root, e_out = "metrics.csv", e_group, e_variant = "gauge";
  std::vector<double> e_tgrid{0.05};
  sc_eval->add_option("--dataset", e_root, "dataset root directory")->required();
  sc_eval->add_option("-o,--output", e_out);
  sc_eval->add_option("--t", e_tgrid, "threshold grid");
  sc_eval->add_option("--group", e_group, "restrict to one group");
  sc_eval->add_option("--variant", e_variant);

  // ---- phantom ----
  auto* sc_ph = app.add_subcommand("phantom", "synthetic test image");
  std::string p_kind = "x_crossing", p_out = "phantom.png";
  PhantomParams pp;
  sc_ph->add_option("--kind", p_kind,
                    "x_crossing | straight_bar | curved_vessel | "
                    "gaussian_ridge | bifurcation");
  sc_ph->add_option("--width", pp.width);
  sc_ph->add_option("--height", pp.height);
  sc_ph->add_option("--bar-width", pp.bar_width);
  sc_ph->add_option("--contrast", pp.contrast);
  sc_ph->add_option("--angle", pp.angle);
  sc_ph->add_option("--noise", pp.noise_std);
  sc_ph->add_option("--seed", pp.seed);
  sc_ph->add_option("-o,--output", p_out);

  // ---- render ----
  auto* sc_ren =
      app.add_subcommand("render", "ndfield dump to PNG tile montage");
  std::string n_in, n_out = "render.png";
  sc_ren->add_option("-i,--input", n_in)->required();
  sc_ren->add_option("-o,--output", n_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  PipelineConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);

  if (sc_kernels->parsed()) {
    auto ks = make_kernels(cfg, kw, kh, k_multi);
    save_ndfield(k_out, to_dump(ks->stability));
    std::cout << "kernel set: " << (k_multi ? "multi-scale" : "single-scale")
              << ", " << ks->n_orient() << " orientations";
    if (k_multi) {
      std::cout << ", scales";
      for (double a : active_scales(*ks)) std::cout << ' ' << a;
    }
    std::cout << "\nstability map written to " << k_out << "\n";
    return 0;
  }
  if (sc_score->parsed()) {
    Image2D f = load_image(s_in, cfg.channel);
    if (s_multi) {
      auto ks = make_kernels(cfg, f.width, f.height, true);
      ScaleOrientationScore s = sos_forward(f, ks);
      save_ndfield(s_out, to_dump(s.field, s.scales));
    } else {
      auto ks = make_kernels(cfg, f.width, f.height, false);
      OrientationScore s = os_forward(f, ks);
      save_ndfield(s_out, to_dump(s.field));
    }
    std::cout << "score written to " << s_out << "\n";
    return 0;
  }
  if (sc_rec->parsed()) {
    Image2D f = load_image(r_in, cfg.channel);
    NdFieldDump d = load_ndfield(r_score);
    Image2D rec;
    if (d.n_scales > 1) {
      ScaleOrientationScore s;
      s.field = field4_from_dump(d);
      s.scales = d.scales;
      s.has_residual = d.n_scales > static_cast<int>(d.scales.size());
      s.kernels = make_kernels(cfg, d.width, d.height, true);
      rec = sos_reconstruct(s);
    } else {
      OrientationScore s;
      s.field = field3_from_dump(d);
      s.kernels = make_kernels(cfg, d.width, d.height, false);
      rec = os_reconstruct_exact(s);
    }
    double err = rel_l2_error(rec, f);
    std::cout << "relative L2 reconstruction error: " << err << "\n";
    save_image(r_out, rec, 16);
    if (!(err < 2e-2)) {
      std::cerr << "reconstruction error above 2e-2\n";
      return 3;
    }
    return 0;
  }

  // shared parameter overrides for the filtering commands
  VesselnessParams vp = cfg.vessel;
  if (!v_scales.empty() || v_norient > 0) {
    if (v_norient > 0) cfg.cake.n_orient = v_norient;
    if (!v_scales.empty()) cfg.ms = ms_params_for_scales(v_scales);
  }
  if (v_cbeta > 0) vp.c_beta = v_cbeta;
  if (v_sigma1 > 0) vp.sigma1 = v_sigma1;
  if (v_sigma2f > 0) vp.sigma2_factor = v_sigma2f;

  if (sc_ves->parsed()) {
    vp.variant = parse_variant(v_variant);
    vp.polarity =
        (v_polarity == "bright") ? Polarity::BrightVessels : Polarity::DarkVessels;
    Image2D f = load_image(v_in, cfg.channel);
    VesselnessMap vm;
    if (vp.variant == VesselVariant::Frangi2D) {
      vm = frangi_multiscale(f, PipelineConfig::active_scales(cfg.ms),
                             vp.sigma1, vp.sigma2_factor, vp.polarity);
    } else {
      auto ks = make_kernels(cfg, f.width, f.height, true);
      vm = vesselness_sim2(f, vp, *ks);
    }
    save_image(v_out, vm.map, 16);
    if (!v_dump.empty()) save_ndfield(v_dump, to_dump(vm.map));
    std::cout << "vesselness map written to " << v_out << "\n";
    return 0;
  }
  if (sc_seg->parsed()) {
    SegParams sp = cfg.seg;
    if (g_t >= 0) sp.t = g_t;
    if (g_gamma > 0) sp.gamma = g_gamma;
    if (g_tau >= 0) sp.tau = g_tau;
    if (g_nu >= 0) sp.nu = g_nu;
    sp.validate();
    vp.variant = parse_variant(g_variant);
    Image2D f = load_image(g_in, cfg.channel);
    BinaryMask mask;
    if (!g_vmap.empty()) {
      Image2D vmap = image_from_dump(load_ndfield(g_vmap));
      BinaryMask th = adaptive_threshold(vmap, sp.gamma, sp.t);
      mask = filter_components(connected_components(th), vmap.width,
                               vmap.height, sp.tau, sp.nu);
    } else if (vp.variant == VesselVariant::Frangi2D) {
      VesselnessMap vm =
          frangi_multiscale(f, PipelineConfig::active_scales(cfg.ms),
                            vp.sigma1, vp.sigma2_factor, vp.polarity);
      BinaryMask th = adaptive_threshold(vm.map, sp.gamma, sp.t);
      mask = filter_components(connected_components(th), f.width, f.height,
                               sp.tau, sp.nu);
    } else {
      auto ks = make_kernels(cfg, f.width, f.height, true);
      mask = segment(f, vp, sp, *ks);
    }
    save_mask(g_out, mask);
    std::cout << "mask written to " << g_out << "\n";
    return 0;
  }
  if (sc_eval->parsed()) {
    vp.variant = parse_variant(e_variant);
    std::vector<EvalRecord> records = ingest_hrf(e_root);
    if (!e_group.empty()) {
      std::vector<EvalRecord> filtered;
      for (auto& r : records)
        if (group_name(r.group) == e_group) filtered.push_back(r);
      records = std::move(filtered);
    }
    if (records.empty()) fail_io("no evaluation records found");
    std::map<std::pair<int, int>, std::shared_ptr<const KernelSet>> cache;
    auto factory = [&](int w, int h) -> const KernelSet& {
      auto& slot = cache[{w, h}];
      if (!slot) slot = make_kernels(cfg, w, h, true);
      return *slot;
    };
    SweepResult res = sweep(records, e_tgrid, vp, cfg.seg, factory, cfg.channel);
    std::ofstream out(e_out);
    if (!out) fail_io("cannot write " + e_out);
    out << sweep_csv(res);
    std::cout << sweep_csv(res);
    if (res.failed_records > 0) {
      std::cerr << res.failed_records << " record(s) failed\n";
      return 2;
    }
    return 0;
  }
  if (sc_ph->parsed()) {
    pp.kind = phantom_kind_from_name(p_kind);
    Image2D img = make_phantom(pp);
    save_image(p_out, img, 16);
    std::cout << "phantom written to " << p_out << "\n";
    return 0;
  }
  if (sc_ren->parsed()) {
    NdFieldDump d = load_ndfield(n_in);
    save_image(n_out, montage(d), 8);
    std::cout << "montage written to " << n_out << "\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const oscore::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

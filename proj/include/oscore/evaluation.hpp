#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "oscore/imageio.hpp"
#include "oscore/segmentation.hpp"

namespace oscore {

enum class Group { Healthy, DiabeticRetinopathy, Glaucoma };

inline const char* group_name(Group g) {
  switch (g) {
    case Group::Healthy: return "healthy";
    case Group::DiabeticRetinopathy: return "diabetic_retinopathy";
    case Group::Glaucoma: return "glaucoma";
  }
  return "?";
}

struct EvalRecord {
  std::string id;
  Group group = Group::Healthy;
  std::string image_path, gt_path, fov_path;
};

struct Metrics {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double sensitivity = 0, specificity = 0, accuracy = 0;
};

// Confusion counts restricted to fov = 1 pixels.
inline Metrics confusion(const BinaryMask& pred, const BinaryMask& gt,
                         const BinaryMask& fov) {
  if (pred.width != gt.width || pred.height != gt.height ||
      pred.width != fov.width || pred.height != fov.height)
    fail_usage("confusion: mask dimensions differ");
  Metrics m;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    if (fov.data[i] == 0.0) continue;
    bool p = pred.data[i] != 0.0, g = gt.data[i] != 0.0;
    if (p && g) ++m.tp;
    else if (p && !g) ++m.fp;
    else if (!p && g) ++m.fn;
    else ++m.tn;
  }
  long total = m.tp + m.fp + m.tn + m.fn;
  if (total == 0) fail_usage("confusion: empty field of view");
  m.sensitivity = (m.tp + m.fn) ? double(m.tp) / (m.tp + m.fn) : 1.0;
  m.specificity = (m.tn + m.fp) ? double(m.tn) / (m.tn + m.fp) : 1.0;
  m.accuracy = double(m.tp + m.tn) / total;
  return m;
}

// Parse the dataset layout: images/, manual1/ (ground truth), mask/ (FOV),
// with stems like 01_h, 07_dr, 12_g encoding the group. Extensions are
// matched case-insensitively; oddly named files are skipped with a warning.
inline std::vector<EvalRecord> ingest_hrf(const std::string& root) {
  namespace fs = std::filesystem;
  fs::path base(root);
  if (!fs::is_directory(base)) fail_io("dataset root not found: " + root);

  auto find_in = [&](const char* sub, const std::string& stem) -> std::string {
    fs::path dir = base / sub;
    if (!fs::is_directory(dir)) return {};
    for (const auto& e : fs::directory_iterator(dir)) {
      std::string s = e.path().stem().string();
      std::transform(s.begin(), s.end(), s.begin(), ::tolower);
      if (s == stem) return e.path().string();
    }
    return {};
  };

  std::vector<EvalRecord> out;
  fs::path imgdir = base / "images";
  if (!fs::is_directory(imgdir)) {
    std::cerr << "warning: no images/ directory under " << root << "\n";
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(imgdir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::string stem = p.stem().string();
    std::transform(stem.begin(), stem.end(), stem.begin(), ::tolower);
    EvalRecord r;
    if (stem.size() > 2 && stem.rfind("_h") == stem.size() - 2)
      r.group = Group::Healthy;
    else if (stem.size() > 3 && stem.rfind("_dr") == stem.size() - 3)
      r.group = Group::DiabeticRetinopathy;
    else if (stem.size() > 2 && stem.rfind("_g") == stem.size() - 2)
      r.group = Group::Glaucoma;
    else {
      std::cerr << "warning: skipping unrecognized image name " << p << "\n";
      continue;
    }
    r.id = stem;
    r.image_path = p.string();
    r.gt_path = find_in("manual1", stem);
    r.fov_path = find_in("mask", stem);
    if (r.gt_path.empty() || r.fov_path.empty()) {
      std::cerr << "warning: missing ground truth or FOV for " << stem << "\n";
      continue;
    }
    out.push_back(std::move(r));
  }
  if (out.size() != 45)
    std::cerr << "warning: expected 45 records, found " << out.size() << "\n";
  return out;
}

struct SweepRow {
  Group group;
  double t;
  double se_mean, se_std, sp_mean, sp_std, acc_mean, acc_std;
  int n_images;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int failed_records = 0;
};

namespace detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= v.size();
  for (double x : v) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / v.size());
}

}  // namespace detail

// Threshold sweep: vesselness computed once per image, re-thresholded and
// component-filtered for every t, aggregated per (group, t). Records failing
// to load are reported and skipped; the count is surfaced to the caller.
template <typename KernelFactory>
inline SweepResult sweep(const std::vector<EvalRecord>& records,
                         const std::vector<double>& t_grid,
                         const VesselnessParams& vp, const SegParams& sp,
                         KernelFactory&& kernels_for_size,
                         Channel channel = Channel::Green) {
  if (t_grid.empty()) fail_usage("sweep: threshold grid is empty");
  SweepResult res;
  // per (group, t): metric samples
  std::map<std::pair<int, double>, std::array<std::vector<double>, 3>> acc;
  for (const EvalRecord& rec : records) {
    try {
      Image2D f = load_image(rec.image_path, channel);
      BinaryMask gt = load_mask(rec.gt_path);
      BinaryMask fov = load_mask(rec.fov_path);
      if (gt.width != f.width || gt.height != f.height ||
          fov.width != f.width || fov.height != f.height)
        fail_io("dimension mismatch for record " + rec.id);
      const KernelSet& ks = kernels_for_size(f.width, f.height);
      VesselnessMap vm =
          (vp.variant == VesselVariant::Frangi2D)
              ? frangi_multiscale(f, ks.scales, vp.sigma1, vp.sigma2_factor,
                                  vp.polarity)
              : vesselness_sim2(f, vp, ks);
      for (double t : t_grid) {
        SegParams sp_t = sp;
        sp_t.t = t;
        BinaryMask th = adaptive_threshold(vm.map, sp_t.gamma, sp_t.t);
        auto comps = connected_components(th);
        BinaryMask pred =
            filter_components(comps, f.width, f.height, sp_t.tau, sp_t.nu);
        Metrics m = confusion(pred, gt, fov);
        auto& bucket = acc[{static_cast<int>(rec.group), t}];
        bucket[0].push_back(m.sensitivity);
        bucket[1].push_back(m.specificity);
        bucket[2].push_back(m.accuracy);
      }
    } catch (const Error& e) {
      std::cerr << "record " << rec.id << " failed: " << e.what() << "\n";
      ++res.failed_records;
    }
  }
  for (const auto& [key, samples] : acc) {
    SweepRow row;
    row.group = static_cast<Group>(key.first);
    row.t = key.second;
    detail::mean_std(samples[0], row.se_mean, row.se_std);
    detail::mean_std(samples[1], row.sp_mean, row.sp_std);
    detail::mean_std(samples[2], row.acc_mean, row.acc_std);
    row.n_images = static_cast<int>(samples[0].size());
    res.rows.push_back(row);
  }
  return res;
}

inline std::string sweep_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "group,t,se_mean,se_std,sp_mean,sp_std,acc_mean,acc_std,n_images\n";
  os.precision(6);
  for (const SweepRow& r : res.rows) {
    os << group_name(r.group) << ',' << r.t << ',' << r.se_mean << ','
       << r.se_std << ',' << r.sp_mean << ',' << r.sp_std << ',' << r.acc_mean
       << ',' << r.acc_std << ',' << r.n_images << '\n';
  }
  return os.str();
}

}  // namespace oscore

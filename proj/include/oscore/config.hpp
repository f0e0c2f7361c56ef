#pragma once

#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "oscore/evaluation.hpp"
#include "oscore/phantom.hpp"
#include "oscore/wavelets.hpp"

namespace oscore {

// Whole-pipeline configuration with defaults matching the reference retinal
// settings: 12 orientations, five scales {1.5, 2.4, 3.8, 6.0, 9.5} px,
// c_beta = 0.05, sigma1 = 0.5, sigma2_factor = 0.2, gamma = 100, tau = 500,
// nu = 0.85, t = 0.05. The scale list is realized as the geometric sequence
// through the first and last entries.
struct PipelineConfig {
  CakeParams cake;
  MultiScaleParams ms;
  VesselnessParams vessel;
  SegParams seg;
  Channel channel = Channel::Green;

  static std::vector<double> active_scales(const MultiScaleParams& ms) {
    std::vector<double> s(ms.n_active);
    for (int i = 0; i < ms.n_active; ++i) s[i] = ms.scale(i);
    return s;
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      fail_usage("config: unknown key '" + it.key() + "' in " + where);
}

}  // namespace detail

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["cake"] = {{"n_orient", c.cake.n_orient},
               {"spline_order", c.cake.spline_order},
               {"inflection", c.cake.inflection},
               {"taylor_order", c.cake.taylor_order},
               {"spatial_window_scale", c.cake.spatial_window_scale}};
  j["multiscale"] = {{"a_minus", c.ms.a_minus},
                     {"s_rho", c.ms.s_rho},
                     {"n_rho", c.ms.n_rho},
                     {"n_active", c.ms.n_active},
                     {"window_sx", c.ms.window_sx},
                     {"window_sy", c.ms.window_sy}};
  const char* variant =
      c.vessel.variant == VesselVariant::Gauge
          ? "gauge"
          : (c.vessel.variant == VesselVariant::XiEta ? "xi-eta" : "frangi");
  j["vesselness"] = {{"sigma1", c.vessel.sigma1},
                     {"sigma2_factor", c.vessel.sigma2_factor},
                     {"c_beta", c.vessel.c_beta},
                     {"variant", variant},
                     {"polarity", c.vessel.polarity == Polarity::DarkVessels
                                      ? "dark"
                                      : "bright"}};
  j["segmentation"] = {{"gamma", c.seg.gamma},
                       {"t", c.seg.t},
                       {"tau", c.seg.tau},
                       {"nu", c.seg.nu}};
  const char* ch = "green";
  if (c.channel == Channel::Red) ch = "red";
  if (c.channel == Channel::Blue) ch = "blue";
  if (c.channel == Channel::Gray) ch = "gray";
  j["channel"] = ch;
  return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  detail::check_keys(
      j, {"cake", "multiscale", "vesselness", "segmentation", "channel"},
      "top level");
  if (j.contains("cake")) {
    const auto& s = j.at("cake");
    detail::check_keys(s,
                       {"n_orient", "spline_order", "inflection",
                        "taylor_order", "spatial_window_scale"},
                       "cake");
    if (s.contains("n_orient")) c.cake.n_orient = s.at("n_orient");
    if (s.contains("spline_order")) c.cake.spline_order = s.at("spline_order");
    if (s.contains("inflection")) c.cake.inflection = s.at("inflection");
    if (s.contains("taylor_order")) c.cake.taylor_order = s.at("taylor_order");
    if (s.contains("spatial_window_scale"))
      c.cake.spatial_window_scale = s.at("spatial_window_scale");
  }
  if (j.contains("multiscale")) {
    const auto& s = j.at("multiscale");
    detail::check_keys(
        s, {"a_minus", "s_rho", "n_rho", "n_active", "window_sx", "window_sy"},
        "multiscale");
    if (s.contains("a_minus")) c.ms.a_minus = s.at("a_minus");
    if (s.contains("s_rho")) c.ms.s_rho = s.at("s_rho");
    if (s.contains("n_rho")) c.ms.n_rho = s.at("n_rho");
    if (s.contains("n_active")) c.ms.n_active = s.at("n_active");
    if (s.contains("window_sx")) c.ms.window_sx = s.at("window_sx");
    if (s.contains("window_sy")) c.ms.window_sy = s.at("window_sy");
  }
  if (j.contains("vesselness")) {
    const auto& s = j.at("vesselness");
    detail::check_keys(
        s, {"sigma1", "sigma2_factor", "c_beta", "variant", "polarity"},
        "vesselness");
    if (s.contains("sigma1")) c.vessel.sigma1 = s.at("sigma1");
    if (s.contains("sigma2_factor"))
      c.vessel.sigma2_factor = s.at("sigma2_factor");
    if (s.contains("c_beta")) c.vessel.c_beta = s.at("c_beta");
    if (s.contains("variant")) {
      std::string v = s.at("variant");
      if (v == "gauge") c.vessel.variant = VesselVariant::Gauge;
      else if (v == "xi-eta") c.vessel.variant = VesselVariant::XiEta;
      else if (v == "frangi") c.vessel.variant = VesselVariant::Frangi2D;
      else fail_usage("config: unknown vesselness variant '" + v + "'");
    }
    if (s.contains("polarity")) {
      std::string v = s.at("polarity");
      if (v == "dark") c.vessel.polarity = Polarity::DarkVessels;
      else if (v == "bright") c.vessel.polarity = Polarity::BrightVessels;
      else fail_usage("config: unknown polarity '" + v + "'");
    }
  }
  if (j.contains("segmentation")) {
    const auto& s = j.at("segmentation");
    detail::check_keys(s, {"gamma", "t", "tau", "nu"}, "segmentation");
    if (s.contains("gamma")) c.seg.gamma = s.at("gamma");
    if (s.contains("t")) c.seg.t = s.at("t");
    if (s.contains("tau")) c.seg.tau = s.at("tau");
    if (s.contains("nu")) c.seg.nu = s.at("nu");
  }
  if (j.contains("channel")) {
    std::string v = j.at("channel");
    if (v == "green") c.channel = Channel::Green;
    else if (v == "red") c.channel = Channel::Red;
    else if (v == "blue") c.channel = Channel::Blue;
    else if (v == "gray") c.channel = Channel::Gray;
    else fail_usage("config: unknown channel '" + v + "'");
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail_usage(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const std::string& path, const PipelineConfig& c) {
  std::ofstream out(path);
  if (!out) fail_io("cannot write config: " + path);
  out << config_to_json(c).dump(2) << "\n";
}

// Geometric scale sequence through the first and last requested scales.
inline MultiScaleParams ms_params_for_scales(const std::vector<double>& scales,
                                             int n_rho = 12) {
  if (scales.size() < 2) fail_usage("need at least two scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1])
      fail_usage("scales must be strictly increasing");
  MultiScaleParams ms;
  ms.a_minus = scales.front();
  ms.n_active = static_cast<int>(scales.size());
  ms.s_rho = std::log(scales.back() / scales.front()) /
             (static_cast<int>(scales.size()) - 1);
  ms.n_rho = std::max(n_rho, ms.n_active);
  return ms;
}

}  // namespace oscore

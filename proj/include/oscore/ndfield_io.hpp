#pragma once

#include <fstream>

#include <json.hpp>

#include "oscore/field.hpp"

namespace oscore {

// Binary field dump: one UTF-8 JSON header line
//   {"width":W,"height":H,"n_theta":T,"n_scales":S,"scales":[...],
//    "dtype":"c64"|"f32","layout":"scale,theta,row-major"}
// terminated by '\n', followed by little-endian raw samples. Complex data is
// stored interleaved (re, im) as 32-bit floats ("c64"); real data as "f32".
struct NdFieldDump {
  int width = 0;
  int height = 0;
  int n_theta = 1;
  int n_scales = 1;
  std::vector<double> scales;
  bool is_complex = false;
  std::vector<float> raw;  // interleaved when complex

  std::size_t samples_per_plane() const {
    return static_cast<std::size_t>(width) * height;
  }
};

namespace detail {

inline void write_floats(std::ofstream& os, const float* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p),
           static_cast<std::streamsize>(n * sizeof(float)));
}

}  // namespace detail

inline void save_ndfield(const std::string& path, const NdFieldDump& d) {
  nlohmann::json hdr = {
      {"width", d.width},     {"height", d.height},
      {"n_theta", d.n_theta}, {"n_scales", d.n_scales},
      {"scales", d.scales},   {"dtype", d.is_complex ? "c64" : "f32"},
      {"layout", "scale,theta,row-major"},
  };
  std::ofstream os(path, std::ios::binary);
  if (!os) fail_io("cannot open for writing: " + path);
  os << hdr.dump() << '\n';
  detail::write_floats(os, d.raw.data(), d.raw.size());
  if (!os) fail_io("short write: " + path);
}

inline NdFieldDump load_ndfield(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail_io("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) fail_io("missing ndfield header: " + path);
  nlohmann::json hdr = nlohmann::json::parse(line, nullptr, false);
  if (hdr.is_discarded()) fail_io("bad ndfield header: " + path);
  NdFieldDump d;
  d.width = hdr.at("width").get<int>();
  d.height = hdr.at("height").get<int>();
  d.n_theta = hdr.at("n_theta").get<int>();
  d.n_scales = hdr.at("n_scales").get<int>();
  d.scales = hdr.at("scales").get<std::vector<double>>();
  std::string dtype = hdr.at("dtype").get<std::string>();
  if (dtype != "c64" && dtype != "f32") fail_io("unknown dtype: " + dtype);
  d.is_complex = dtype == "c64";
  std::size_t n = static_cast<std::size_t>(d.width) * d.height * d.n_theta *
                  d.n_scales * (d.is_complex ? 2 : 1);
  d.raw.resize(n);
  is.read(reinterpret_cast<char*>(d.raw.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(is.gcount()) != n * sizeof(float))
    fail_io("truncated ndfield payload: " + path);
  return d;
}

inline NdFieldDump to_dump(const Image2D& img) {
  NdFieldDump d;
  d.width = img.width;
  d.height = img.height;
  d.raw.assign(img.data.begin(), img.data.end());
  return d;
}

inline NdFieldDump to_dump(const Field3D& f) {
  NdFieldDump d;
  d.width = f.width;
  d.height = f.height;
  d.n_theta = f.n_theta;
  d.is_complex = true;
  d.raw.resize(f.data.size() * 2);
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    d.raw[2 * i] = static_cast<float>(f.data[i].real());
    d.raw[2 * i + 1] = static_cast<float>(f.data[i].imag());
  }
  return d;
}

inline NdFieldDump to_dump(const Field4D& f, const std::vector<double>& scales) {
  NdFieldDump d;
  d.width = f.width;
  d.height = f.height;
  d.n_theta = f.n_theta;
  d.n_scales = f.n_scale;
  d.scales = scales;
  d.is_complex = true;
  d.raw.resize(f.data.size() * 2);
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    d.raw[2 * i] = static_cast<float>(f.data[i].real());
    d.raw[2 * i + 1] = static_cast<float>(f.data[i].imag());
  }
  return d;
}

inline Image2D image_from_dump(const NdFieldDump& d) {
  if (d.is_complex || d.n_theta != 1 || d.n_scales != 1)
    fail_io("ndfield dump is not a scalar image");
  Image2D img(d.width, d.height);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = d.raw[i];
  return img;
}

inline Field3D field3_from_dump(const NdFieldDump& d) {
  if (!d.is_complex || d.n_scales != 1) fail_io("ndfield dump is not a 3D score");
  Field3D f(d.n_theta, d.height, d.width);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    f.data[i] = cplx(d.raw[2 * i], d.raw[2 * i + 1]);
  return f;
}

inline Field4D field4_from_dump(const NdFieldDump& d) {
  if (!d.is_complex) fail_io("ndfield dump is not complex");
  Field4D f(d.n_scales, d.n_theta, d.height, d.width);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    f.data[i] = cplx(d.raw[2 * i], d.raw[2 * i + 1]);
  return f;
}

}  // namespace oscore

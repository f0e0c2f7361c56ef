#pragma once

#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "oscore/field.hpp"
#include "oscore/common.hpp"

namespace oscore {

enum class Channel { Green, Red, Blue, Gray };

// Load an image as a [0,1] scalar field. Color inputs use the requested
// channel (green by default, the standard pick for fundus photographs);
// Gray averages. Intensities are scaled by the file's bit depth.
inline Image2D load_image(const std::string& path, Channel ch = Channel::Green) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) fail_io("cannot read image: " + path);
  double scale = 1.0;
  switch (m.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    case CV_32F: case CV_64F: scale = 1.0; break;
    default: fail_io("unsupported pixel depth in " + path);
  }
  cv::Mat f;
  m.convertTo(f, CV_64F, scale);
  Image2D img(f.cols, f.rows);
  if (f.channels() == 1) {
    for (int y = 0; y < f.rows; ++y)
      for (int x = 0; x < f.cols; ++x) img.at(x, y) = f.at<double>(y, x);
    return img;
  }
  if (f.channels() < 3) fail_io("unsupported channel count in " + path);
  // OpenCV stores BGR
  int idx = 1;
  if (ch == Channel::Red) idx = 2;
  if (ch == Channel::Blue) idx = 0;
  for (int y = 0; y < f.rows; ++y)
    for (int x = 0; x < f.cols; ++x) {
      const double* px = f.ptr<double>(y) + static_cast<std::size_t>(x) * f.channels();
      img.at(x, y) = (ch == Channel::Gray)
                         ? (px[0] + px[1] + px[2]) / 3.0
                         : px[idx];
    }
  return img;
}

// Load a mask image; any channel value > half range counts as set.
inline Image2D load_mask(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (m.empty()) fail_io("cannot read mask: " + path);
  Image2D img(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      img.at(x, y) = (m.at<std::uint8_t>(y, x) > 127) ? 1.0 : 0.0;
  return img;
}

// Save a [0,1] field as 8- or 16-bit grayscale PNG (values clamped).
inline void save_image(const std::string& path, const Image2D& img,
                       int bit_depth = 16) {
  cv::Mat m;
  if (bit_depth == 16) {
    m.create(img.height, img.width, CV_16U);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        m.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(
            std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 65535.0));
  } else if (bit_depth == 8) {
    m.create(img.height, img.width, CV_8U);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(
            std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0));
  } else {
    fail_usage("save_image: bit depth must be 8 or 16");
  }
  if (!cv::imwrite(path, m)) fail_io("cannot write image: " + path);
}

// Save a {0,1} mask as a 1-bit PNG.
inline void save_mask(const std::string& path, const Image2D& mask) {
  cv::Mat m(mask.height, mask.width, CV_8U);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      m.at<std::uint8_t>(y, x) = mask.at(x, y) != 0.0 ? 255 : 0;
  std::vector<int> flags{cv::IMWRITE_PNG_BILEVEL, 1};
  if (!cv::imwrite(path, m, flags)) fail_io("cannot write mask: " + path);
}

}  // namespace oscore

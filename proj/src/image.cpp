// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstring>

#include "fclip/errors.hpp"

namespace fclip {

Image::Image(int h, int w, std::uint8_t fill)
    : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

namespace {

cv::Mat to_bgr_mat(const Image& image) {
  cv::Mat rgb(image.height, image.width, CV_8UC3,
              const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

Image from_bgr_mat(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Image out(rgb.rows, rgb.cols);
  for (int y = 0; y < rgb.rows; ++y) {
    std::memcpy(out.pixels.data() + static_cast<std::size_t>(y) * rgb.cols * 3, rgb.ptr(y),
                static_cast<std::size_t>(rgb.cols) * 3);
  }
  return out;
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error("cannot read image: " + path.string());
  return from_bgr_mat(bgr);
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw Error("refusing to write empty image: " + path.string());
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imwrite(path.string(), to_bgr_mat(image), params)) {
    throw Error("cannot write image: " + path.string());
  }
}

Image resize_square(const Image& image, int side) {
  if (image.empty()) throw InvalidArgument("resize of empty image");
  if (side <= 0) throw InvalidArgument("resize side must be positive");
  if (image.height == side && image.width == side) return image;
  cv::Mat resized;
  cv::resize(to_bgr_mat(image), resized, cv::Size(side, side), 0, 0, cv::INTER_AREA);
  return from_bgr_mat(resized);
}

}  // namespace fclip

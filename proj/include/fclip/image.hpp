// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fclip {

// Interleaved 8-bit RGB image, row-major.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0);

  bool empty() const { return height <= 0 || width <= 0; }
  std::size_t size() const { return pixels.size(); }

  std::uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

// PNG round trip. Throws fclip::Error on I/O or decode failure.
Image read_png(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

// Area-averaging resize to a square side. Returns a copy when already sized.
Image resize_square(const Image& image, int side);

}  // namespace fclip

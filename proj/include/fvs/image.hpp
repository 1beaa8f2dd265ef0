#pragma once

#include <cstdint>
#include <vector>

#include "fvs/error.hpp"

namespace fvs {

// Row-major 8-bit RGB raster. origin_* record where the tile was cut from
// (in pixels at the level it was read at).
struct RgbTile {
  std::int64_t origin_x = 0;
  std::int64_t origin_y = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  static RgbTile filled(int w, int h, std::uint8_t r, std::uint8_t g,
                        std::uint8_t b) {
    RgbTile t;
    t.width = w;
    t.height = h;
    t.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < t.pixels.size(); i += 3) {
      t.pixels[i] = r;
      t.pixels[i + 1] = g;
      t.pixels[i + 2] = b;
    }
    return t;
  }

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  bool valid() const {
    return width > 0 && height > 0 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }
};

}  // namespace fvs

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fvs/image.hpp"

namespace fvs {

// Rec.601 luma in [0, 255].
std::vector<double> to_gray(const RgbTile& img);

// HSV saturation in [0, 1]; 0 where the pixel is black.
std::vector<double> saturation(const RgbTile& img);

struct Histogram256 {
  std::array<std::uint64_t, 256> bins{};
  std::uint64_t total = 0;
  double lo = 0.0, hi = 1.0;
  int occupied() const;
};

// Values are clamped into [lo, hi] before binning. hi must be > lo.
Histogram256 histogram256(std::span<const double> values, double lo, double hi);

// Otsu's between-class-variance threshold. Returns the bin index t such that
// "value bin > t" is foreground; nullopt when fewer than two bins are
// occupied (degenerate histogram). Ties resolve to the lowest t.
std::optional<int> otsu_threshold(const Histogram256& h);

// Population variance of the 4-neighbour Laplacian over interior pixels.
// Zero for constant images and for images smaller than 3x3.
double laplacian_variance(std::span<const double> gray, int w, int h);

// Binary masks are w*h vectors of 0/1 bytes.

// Morphological opening with a 3x3 square structuring element, one
// iteration. Out-of-bounds neighbours count as background for the erosion.
void binary_open_3x3(std::vector<std::uint8_t>& mask, int w, int h);

// 8-connected component labelling. Returns per-pixel labels (0 = background,
// components numbered from 1) and fills `areas` with the pixel count of each
// component (areas[k-1] = area of component k).
std::vector<std::int32_t> connected_components8(
    const std::vector<std::uint8_t>& mask, int w, int h,
    std::vector<std::int64_t>& areas);

// Fills enclosed background regions (4-connected, not touching the border)
// whose area is <= max_area.
void fill_small_holes(std::vector<std::uint8_t>& mask, int w, int h,
                      std::int64_t max_area);

// Exact integer box-filter downsample: output pixel (ox, oy) is the rounded
// mean of the input pixels px with px*out_w/in_w == ox (and likewise rows).
RgbTile box_downsample(const RgbTile& img, int out_w, int out_h);

}  // namespace fvs

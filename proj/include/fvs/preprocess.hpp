#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fvs/image.hpp"
#include "fvs/slide_io.hpp"

namespace fvs {

// Tissue mask at thumbnail scale. scale = level-0 pixels per mask pixel.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0/1, row-major
  double scale = 1.0;
};

struct TissueMaskResult {
  BinaryMask mask;
  // Set when every saturation value fell in one histogram bin; the mask then
  // comes from a fixed absolute threshold instead of Otsu.
  bool degenerate_histogram = false;
};

struct PatchRecord {
  std::int64_t x = 0;  // level-0 top-left
  std::int64_t y = 0;
  int size = 512;
  double tissue_fraction = 0.0;
  double blur_score = 0.0;      // variance of Laplacian
  double mean_brightness = 0.0;  // [0, 255]
  int nucleus_count = 0;
  bool quality_pass = false;
  bool selected = false;
};

struct SelectionConfig {
  int patch_size = 512;
  int stride = 512;  // non-overlapping by default
  int n_patches = 0;  // required: how many patches to keep per slide
  double min_tissue_fraction = 0.5;
  double blur_threshold = 50.0;
  double brightness_low = 40.0;
  double brightness_high = 235.0;
  enum class Mode { cellularity, random } mode = Mode::cellularity;
  std::uint64_t seed = 0;

  void validate() const;
};

// Optical-density vectors for stain unmixing, rows = hematoxylin, eosin,
// residual; rows unit-norm.
struct StainMatrix {
  std::array<std::array<double, 3>, 3> od;

  // Standard published H&E vectors; residual = normalized H x E.
  static StainMatrix standard_he();
  // Rows of the unmixing matrix: concentration_k = inv[k] . od_pixel.
  std::array<std::array<double, 3>, 3> unmix_rows() const;
  void validate() const;
};

// Saturation-Otsu tissue detector with small-hole filling (<= 64 px^2).
TissueMaskResult tissue_mask(const RgbTile& thumbnail);

// One record per stride step whose projected mask coverage meets
// min_tissue_fraction; tissue_fraction filled, other scores unset.
std::vector<PatchRecord> generate_patch_grid(const SlideHandle& slide,
                                             const BinaryMask& mask,
                                             const SelectionConfig& cfg);

struct QualityResult {
  bool pass = false;
  double blur_score = 0.0;
  double mean_brightness = 0.0;
};

QualityResult quality_filter(const RgbTile& patch, const SelectionConfig& cfg);

// Connected nuclei in the thresholded hematoxylin channel: per-channel
// OD = -log10((I+1)/256), unmix, Otsu on hematoxylin, 3x3 opening, then
// 8-connected components with area >= 30 px.
int nucleus_count(const RgbTile& patch, const StainMatrix& stains);
inline constexpr int kNucleusMinArea = 30;

// Top-n by nucleus count (ties by (y, x) ascending) or a seeded uniform
// sample; returns the chosen records with selected=true, in rank order
// (cellularity) or (y, x) order (random).
std::vector<PatchRecord> select_patches(const std::vector<PatchRecord>& records,
                                        const SelectionConfig& cfg);

// Fills quality scores for all records and nucleus counts for those that
// pass; parallel over patches.
void score_patches(const SlideHandle& slide, std::vector<PatchRecord>& records,
                   const SelectionConfig& cfg, const StainMatrix& stains);

// Full per-slide pass: thumbnail -> mask -> grid -> scores -> selection.
// Returns all grid records with flags set; selected ones satisfy
// quality_pass and carry nucleus counts.
std::vector<PatchRecord> run_preprocess(const SlideHandle& slide,
                                        const SelectionConfig& cfg,
                                        const StainMatrix& stains,
                                        int thumb_max_dim = 256);

void write_patches_csv(const std::filesystem::path& path,
                       std::span<const PatchRecord> records);
std::vector<PatchRecord> read_patches_csv(const std::filesystem::path& path);

}  // namespace fvs

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fvs/image.hpp"
#include "fvs/rng.hpp"

namespace fvs {

// Deterministic H&E-look slide generator. Class signal is carried by nucleus
// density by default (optionally with extra-dense hotspot cells so that
// cellularity-ranked selection sees structure random selection misses); a
// texture-contrast knob can carry the signal instead.
struct SynthConfig {
  std::int64_t width = 2048;
  std::int64_t height = 2048;
  int tile_size = 512;
  std::uint64_t seed = 1;

  int tissue_blob_count = 6;
  int blob_radius_min = 300;
  int blob_radius_max = 520;

  // Expected nuclei per patch_size^2 of pure tissue.
  double nucleus_density = 30.0;
  // Cells chosen as hotspots get nucleus_density + hotspot_density.
  double hotspot_density = 0.0;
  int hotspot_cells = 0;

  int nucleus_radius_min = 4;
  int nucleus_radius_max = 7;
  double texture_contrast = 0.3;  // [0,1]; scales tissue noise amplitude

  int patch_size = 512;     // ground-truth accounting grid
  int thumb_max_dim = 256;  // scale of the ground-truth tissue mask
  int color_shift = 0;      // per-center intensity shift, [-5, 5]

  std::string label;
  std::string center_id;
};

struct GroundTruth {
  int mask_width = 0;
  int mask_height = 0;
  std::vector<std::uint8_t> mask;  // tissue at thumbnail scale, 0/1

  struct PatchCount {
    std::int64_t x = 0;
    std::int64_t y = 0;
    int count = 0;
  };
  std::vector<PatchCount> patch_counts;  // planted nuclei per grid cell

  std::string label;
  std::string center_id;
};

struct SynthResult {
  std::filesystem::path manifest_path;
  std::filesystem::path truth_path;
  GroundTruth truth;
};

// Writes <name>.json (manifest), <name>.truth.json and tile PNGs under
// out_dir. Same config -> bit-identical files.
SynthResult generate_synthetic_slide(const SynthConfig& cfg,
                                     const std::filesystem::path& out_dir,
                                     const std::string& name);

// Renders one filled, rotated ellipse; exposed so tests can plant nuclei
// with known geometry.
void draw_ellipse(RgbTile& img, double cx, double cy, double rx, double ry,
                  double angle, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b);

void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& t);
GroundTruth read_ground_truth(const std::filesystem::path& path);

// ----- dataset generation -----

struct DatasetEntry {
  std::string manifest_path;  // relative to the dataset manifest
  std::string label;
  std::string center_id;
};

struct DatasetSpec {
  int slides_per_class = 30;
  std::vector<std::string> class_names = {"0", "1"};
  std::vector<std::string> centers = {"C0", "C1", "C2", "C3", "C4"};
  SynthConfig base;
  // Per-class overrides, indexed like class_names. Empty = use base values.
  std::vector<double> density_per_class = {30.0, 80.0};
  std::vector<double> hotspot_density_per_class;
  std::vector<int> hotspot_cells_per_class;
  std::vector<double> texture_per_class;
};

// Slides are assigned to centers round-robin within each class, so labels
// stay balanced per center. Per-slide RNG streams derive from
// (base.seed, slide index). Writes slides plus dataset.json.
std::vector<DatasetEntry> generate_dataset(const DatasetSpec& spec,
                                           const std::filesystem::path& out_dir);

void write_dataset_manifest(const std::filesystem::path& path,
                            const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> read_dataset_manifest(
    const std::filesystem::path& path);

// Deterministic per-center color shift in [-5, 5].
int center_color_shift(int center_index);

}  // namespace fvs

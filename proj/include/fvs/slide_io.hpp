#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fvs/image.hpp"

namespace fvs {

struct LevelInfo {
  int level_index = 0;
  int downsample = 1;  // power of two, strictly increasing with level_index
};

// JSON manifest describing a tiled slide. Tiles are individual PNG files
// addressed by tile_path_pattern ({level},{col},{row} placeholders) resolved
// relative to the manifest directory. Level 0 is the full-resolution plane;
// patches are always cut there.
struct SlideManifest {
  std::int64_t width = 0;   // level-0 pixels
  std::int64_t height = 0;  // level-0 pixels
  int tile_size = 0;        // square
  std::vector<LevelInfo> levels;
  std::string tile_path_pattern;
  std::string pixel_format = "RGB8";
  std::string label;      // optional class name, empty if absent
  std::string center_id;  // optional acquisition site, empty if absent
};

nlohmann::json manifest_to_json(const SlideManifest& m);
SlideManifest manifest_from_json(const nlohmann::json& j);
void write_slide_manifest(const std::filesystem::path& path,
                          const SlideManifest& m);

// Read-only after open; safe for concurrent read_region calls (each call
// decodes its own tiles, no shared mutable state).
class SlideHandle {
 public:
  // Parses and validates the manifest and verifies every tile in every
  // level's grid exists on disk. No pixel data is loaded.
  static SlideHandle open(const std::filesystem::path& manifest_path);

  const SlideManifest& manifest() const { return m_; }
  std::int64_t width() const { return m_.width; }
  std::int64_t height() const { return m_.height; }
  const std::string& label() const { return m_.label; }
  const std::string& center_id() const { return m_.center_id; }

  std::int64_t level_width(int level) const;
  std::int64_t level_height(int level) const;
  int tile_cols(int level) const;
  int tile_rows(int level) const;

  // Pixels of [x, x+w) x [y, y+h) at `level`, stitched across tile
  // boundaries. The region must lie fully inside the level.
  RgbTile read_region(int level, std::int64_t x, std::int64_t y, int w,
                      int h) const;

  // Aspect-preserving box-filter downsample of level 0 with the longer side
  // <= max_dim (never upsamples). Streams tile by tile, so only the
  // thumbnail accumulator and one tile are ever resident.
  RgbTile thumbnail(int max_dim) const;

  std::filesystem::path tile_path(int level, int col, int row) const;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  SlideManifest m_;
  std::filesystem::path dir_;
};

}  // namespace fvs

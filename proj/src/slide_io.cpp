#include "fvs/slide_io.hpp"

#include <algorithm>
#include <cstring>

#include <nlohmann/json.hpp>

#include "fvs/numio.hpp"
#include "fvs/png_io.hpp"

namespace fvs {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

std::string substitute(std::string pattern, const std::string& key,
                       const std::string& value) {
  const std::string tag = "{" + key + "}";
  std::size_t pos;
  while ((pos = pattern.find(tag)) != std::string::npos) {
    pattern.replace(pos, tag.size(), value);
  }
  return pattern;
}

void require(bool cond, const std::string& what) {
  if (!cond) raise(Errc::malformed_manifest, what);
}

}  // namespace

nlohmann::json manifest_to_json(const SlideManifest& m) {
  nlohmann::json j;
  j["width"] = m.width;
  j["height"] = m.height;
  j["tile_size"] = m.tile_size;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : m.levels) {
    levels.push_back({{"level_index", l.level_index},
                      {"downsample", l.downsample}});
  }
  j["levels"] = levels;
  j["tile_path_pattern"] = m.tile_path_pattern;
  j["pixel_format"] = m.pixel_format;
  if (!m.label.empty()) j["label"] = m.label;
  if (!m.center_id.empty()) j["center_id"] = m.center_id;
  return j;
}

SlideManifest manifest_from_json(const nlohmann::json& j) {
  SlideManifest m;
  try {
    m.width = j.at("width").get<std::int64_t>();
    m.height = j.at("height").get<std::int64_t>();
    m.tile_size = j.at("tile_size").get<int>();
    for (const auto& l : j.at("levels")) {
      m.levels.push_back({l.at("level_index").get<int>(),
                          l.at("downsample").get<int>()});
    }
    m.tile_path_pattern = j.at("tile_path_pattern").get<std::string>();
    m.pixel_format = j.at("pixel_format").get<std::string>();
    if (j.contains("label")) m.label = j.at("label").get<std::string>();
    if (j.contains("center_id"))
      m.center_id = j.at("center_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_manifest, e.what());
  }

  require(m.width > 0, "width must be > 0");
  require(m.height > 0, "height must be > 0");
  require(m.tile_size > 0, "tile_size must be > 0");
  require(m.pixel_format == "RGB8",
          "pixel_format must be RGB8, got " + m.pixel_format);
  require(!m.levels.empty(), "levels list is empty");
  require(m.levels[0].level_index == 0 && m.levels[0].downsample == 1,
          "level 0 with downsample 1 must come first");
  for (std::size_t i = 0; i < m.levels.size(); ++i) {
    const int ds = m.levels[i].downsample;
    require(m.levels[i].level_index == static_cast<int>(i),
            "level_index values must be 0,1,2,...");
    require(ds > 0 && (ds & (ds - 1)) == 0,
            "downsample must be a power of two");
    if (i > 0)
      require(ds > m.levels[i - 1].downsample,
              "downsamples must strictly increase");
  }
  require(m.tile_path_pattern.find("{level}") != std::string::npos &&
              m.tile_path_pattern.find("{col}") != std::string::npos &&
              m.tile_path_pattern.find("{row}") != std::string::npos,
          "tile_path_pattern must contain {level},{col},{row}");
  return m;
}

void write_slide_manifest(const std::filesystem::path& path,
                          const SlideManifest& m) {
  write_file_atomic(path.string(), manifest_to_json(m).dump(2) + "\n");
}

SlideHandle SlideHandle::open(const std::filesystem::path& manifest_path) {
  if (!std::filesystem::exists(manifest_path))
    raise(Errc::file_not_found, manifest_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path.string()));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_manifest,
          manifest_path.string() + ": " + e.what());
  }
  SlideHandle h;
  h.m_ = manifest_from_json(j);
  h.dir_ = manifest_path.parent_path();

  for (const auto& level : h.m_.levels) {
    const int li = level.level_index;
    for (int row = 0; row < h.tile_rows(li); ++row) {
      for (int col = 0; col < h.tile_cols(li); ++col) {
        const auto p = h.tile_path(li, col, row);
        if (!std::filesystem::exists(p)) {
          raise(Errc::missing_tile,
                "level " + std::to_string(li) + " tile (" +
                    std::to_string(col) + "," + std::to_string(row) +
                    "): " + p.string());
        }
      }
    }
  }
  return h;
}

std::int64_t SlideHandle::level_width(int level) const {
  return ceil_div(m_.width, m_.levels.at(level).downsample);
}

std::int64_t SlideHandle::level_height(int level) const {
  return ceil_div(m_.height, m_.levels.at(level).downsample);
}

int SlideHandle::tile_cols(int level) const {
  return static_cast<int>(ceil_div(level_width(level), m_.tile_size));
}

int SlideHandle::tile_rows(int level) const {
  return static_cast<int>(ceil_div(level_height(level), m_.tile_size));
}

std::filesystem::path SlideHandle::tile_path(int level, int col,
                                             int row) const {
  std::string p = m_.tile_path_pattern;
  p = substitute(p, "level", std::to_string(level));
  p = substitute(p, "col", std::to_string(col));
  p = substitute(p, "row", std::to_string(row));
  return dir_ / p;
}

RgbTile SlideHandle::read_region(int level, std::int64_t x, std::int64_t y,
                                 int w, int h) const {
  if (level < 0 || level >= static_cast<int>(m_.levels.size()))
    raise(Errc::out_of_bounds, "no such level " + std::to_string(level));
  const std::int64_t lw = level_width(level);
  const std::int64_t lh = level_height(level);
  if (w <= 0 || h <= 0 || x < 0 || y < 0 || x + w > lw || y + h > lh) {
    raise(Errc::out_of_bounds,
          "region (" + std::to_string(x) + "," + std::to_string(y) + "," +
              std::to_string(w) + "," + std::to_string(h) + ") outside level " +
              std::to_string(level) + " of " + std::to_string(lw) + "x" +
              std::to_string(lh));
  }

  RgbTile out;
  out.origin_x = x;
  out.origin_y = y;
  out.width = w;
  out.height = h;
  out.pixels.assign(static_cast<std::size_t>(w) * h * 3, 0);

  const int ts = m_.tile_size;
  const int col0 = static_cast<int>(x / ts);
  const int col1 = static_cast<int>((x + w - 1) / ts);
  const int row0 = static_cast<int>(y / ts);
  const int row1 = static_cast<int>((y + h - 1) / ts);
  for (int row = row0; row <= row1; ++row) {
    for (int col = col0; col <= col1; ++col) {
      const RgbTile tile = read_png(tile_path(level, col, row));
      const std::int64_t tx0 = static_cast<std::int64_t>(col) * ts;
      const std::int64_t ty0 = static_cast<std::int64_t>(row) * ts;
      const std::int64_t ix0 = std::max(x, tx0);
      const std::int64_t iy0 = std::max(y, ty0);
      const std::int64_t ix1 = std::min(x + w, tx0 + tile.width);
      const std::int64_t iy1 = std::min(y + h, ty0 + tile.height);
      for (std::int64_t yy = iy0; yy < iy1; ++yy) {
        const std::uint8_t* src =
            tile.at(static_cast<int>(ix0 - tx0), static_cast<int>(yy - ty0));
        std::uint8_t* dst =
            out.at(static_cast<int>(ix0 - x), static_cast<int>(yy - y));
        std::memcpy(dst, src, static_cast<std::size_t>(ix1 - ix0) * 3);
      }
    }
  }
  return out;
}

RgbTile SlideHandle::thumbnail(int max_dim) const {
  if (max_dim < 16) raise(Errc::out_of_bounds, "max_dim must be >= 16");
  const std::int64_t W = m_.width, H = m_.height;
  const std::int64_t longer = std::max(W, H);
  int out_w, out_h;
  if (longer <= max_dim) {
    out_w = static_cast<int>(W);
    out_h = static_cast<int>(H);
  } else {
    const double s = static_cast<double>(max_dim) / static_cast<double>(longer);
    out_w = std::max(1, static_cast<int>(std::llround(W * s)));
    out_h = std::max(1, static_cast<int>(std::llround(H * s)));
  }

  std::vector<std::uint64_t> sums(static_cast<std::size_t>(out_w) * out_h * 3,
                                  0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(out_w) * out_h,
                                    0);
  const int ts = m_.tile_size;
  for (int row = 0; row < tile_rows(0); ++row) {
    for (int col = 0; col < tile_cols(0); ++col) {
      const RgbTile tile = read_png(tile_path(0, col, row));
      const std::int64_t bx = static_cast<std::int64_t>(col) * ts;
      const std::int64_t by = static_cast<std::int64_t>(row) * ts;
      for (int yy = 0; yy < tile.height; ++yy) {
        const std::int64_t gy = by + yy;
        if (gy >= H) break;
        const int oy = static_cast<int>(gy * out_h / H);
        for (int xx = 0; xx < tile.width; ++xx) {
          const std::int64_t gx = bx + xx;
          if (gx >= W) break;
          const int ox = static_cast<int>(gx * out_w / W);
          const std::uint8_t* p = tile.at(xx, yy);
          const std::size_t o = static_cast<std::size_t>(oy) * out_w + ox;
          sums[o * 3] += p[0];
          sums[o * 3 + 1] += p[1];
          sums[o * 3 + 2] += p[2];
          ++counts[o];
        }
      }
    }
  }
  RgbTile out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.resize(static_cast<std::size_t>(out_w) * out_h * 3);
  for (std::size_t o = 0; o < counts.size(); ++o) {
    const std::uint64_t c = std::max<std::uint64_t>(counts[o], 1);
    for (int ch = 0; ch < 3; ++ch) {
      out.pixels[o * 3 + ch] =
          static_cast<std::uint8_t>((sums[o * 3 + ch] + c / 2) / c);
    }
  }
  return out;
}

}  // namespace fvs

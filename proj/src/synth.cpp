#include "fvs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "fvs/imgproc.hpp"
#include "fvs/numio.hpp"
#include "fvs/png_io.hpp"
#include "fvs/slide_io.hpp"

namespace fvs {

namespace {

std::uint8_t clamp_u8(int v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

struct Disk {
  double cx, cy, r;
};

void shade_pixel(RgbTile& img, std::int64_t x, std::int64_t y, int r, int g,
                 int b) {
  std::uint8_t* p = img.at(static_cast<int>(x), static_cast<int>(y));
  p[0] = clamp_u8(r);
  p[1] = clamp_u8(g);
  p[2] = clamp_u8(b);
}

}  // namespace

void draw_ellipse(RgbTile& img, double cx, double cy, double rx, double ry,
                  double angle, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b) {
  const double rmax = std::max(rx, ry);
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - rmax)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + rmax)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - rmax)));
  const int y1 =
      std::min(img.height - 1, static_cast<int>(std::ceil(cy + rmax)));
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      const double u = (dx * ca + dy * sa) / rx;
      const double v = (-dx * sa + dy * ca) / ry;
      if (u * u + v * v <= 1.0) {
        std::uint8_t* p = img.at(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
      }
    }
  }
}

SynthResult generate_synthetic_slide(const SynthConfig& cfg,
                                     const std::filesystem::path& out_dir,
                                     const std::string& name) {
  const std::int64_t W = cfg.width, H = cfg.height;
  const int shift = cfg.color_shift;
  std::filesystem::create_directories(out_dir / (name + "_tiles"));

  Rng root(cfg.seed);

  // Tissue support: union of random disks.
  Rng blob_rng = root.substream("blobs");
  std::vector<Disk> disks;
  for (int i = 0; i < cfg.tissue_blob_count; ++i) {
    Disk d;
    d.cx = blob_rng.uniform(0.15 * W, 0.85 * W);
    d.cy = blob_rng.uniform(0.15 * H, 0.85 * H);
    d.r = blob_rng.uniform(cfg.blob_radius_min, cfg.blob_radius_max);
    disks.push_back(d);
  }
  std::vector<std::uint8_t> tissue(static_cast<std::size_t>(W) * H, 0);
  for (const Disk& d : disks) {
    const std::int64_t x0 = std::max<std::int64_t>(0, (std::int64_t)(d.cx - d.r) - 1);
    const std::int64_t x1 = std::min<std::int64_t>(W - 1, (std::int64_t)(d.cx + d.r) + 1);
    const std::int64_t y0 = std::max<std::int64_t>(0, (std::int64_t)(d.cy - d.r) - 1);
    const std::int64_t y1 = std::min<std::int64_t>(H - 1, (std::int64_t)(d.cy + d.r) + 1);
    const double r2 = d.r * d.r;
    for (std::int64_t y = y0; y <= y1; ++y) {
      const double dy = y + 0.5 - d.cy;
      for (std::int64_t x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - d.cx;
        if (dx * dx + dy * dy <= r2)
          tissue[static_cast<std::size_t>(y) * W + x] = 1;
      }
    }
  }

  // Paint background and noisy tissue.
  RgbTile img = RgbTile::filled(static_cast<int>(W), static_cast<int>(H),
                                clamp_u8(245 + shift), clamp_u8(245 + shift),
                                clamp_u8(245 + shift));
  Rng tex_rng = root.substream("texture");
  const int amp = static_cast<int>(std::lround(cfg.texture_contrast * 25.0));
  for (std::int64_t y = 0; y < H; ++y) {
    for (std::int64_t x = 0; x < W; ++x) {
      if (!tissue[static_cast<std::size_t>(y) * W + x]) continue;
      const int n = amp > 0 ? static_cast<int>(tex_rng.uniform_int(-amp, amp))
                            : 0;
      shade_pixel(img, x, y, 230 + shift + n, 180 + shift + n,
                  200 + shift + n);
    }
  }

  // Grid of full patch cells; pick hotspot cells among well-covered ones.
  const int ps = cfg.patch_size;
  std::vector<GroundTruth::PatchCount> cells;
  std::vector<double> coverage;
  for (std::int64_t gy = 0; gy + ps <= H; gy += ps) {
    for (std::int64_t gx = 0; gx + ps <= W; gx += ps) {
      std::int64_t cnt = 0;
      for (std::int64_t y = gy; y < gy + ps; ++y) {
        const std::uint8_t* row = tissue.data() + y * W;
        for (std::int64_t x = gx; x < gx + ps; ++x) cnt += row[x];
      }
      cells.push_back({gx, gy, 0});
      coverage.push_back(static_cast<double>(cnt) /
                         (static_cast<double>(ps) * ps));
    }
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (coverage[i] >= 0.7) eligible.push_back(i);
  }
  Rng hot_rng = root.substream("hotspots");
  std::vector<bool> is_hotspot(cells.size(), false);
  {
    std::vector<std::size_t> pool = eligible;
    int want = std::min<int>(cfg.hotspot_cells,
                             static_cast<int>(pool.size()));
    for (int k = 0; k < want; ++k) {
      const std::size_t pick = static_cast<std::size_t>(
          hot_rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
      is_hotspot[pool[pick]] = true;
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }

  // Plant nuclei cell by cell. Nuclei stay wholly inside their cell and do
  // not overlap each other, so ground-truth counts are unambiguous.
  Rng nuc_rng = root.substream("nuclei");
  struct Planted {
    double cx, cy, r;
  };
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    double lambda = cfg.nucleus_density * coverage[ci];
    if (is_hotspot[ci]) lambda += cfg.hotspot_density * coverage[ci];
    const int want = nuc_rng.poisson(lambda);
    std::vector<Planted> placed;
    for (int k = 0; k < want; ++k) {
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        const double rx =
            nuc_rng.uniform(cfg.nucleus_radius_min, cfg.nucleus_radius_max);
        const double ry =
            nuc_rng.uniform(cfg.nucleus_radius_min, cfg.nucleus_radius_max);
        const double angle = nuc_rng.uniform(0.0, M_PI);
        const double rmax = std::max(rx, ry);
        const double margin = rmax + 2.0;
        if (2.0 * margin >= ps) break;
        const double cx =
            nuc_rng.uniform(cells[ci].x + margin, cells[ci].x + ps - margin);
        const double cy =
            nuc_rng.uniform(cells[ci].y + margin, cells[ci].y + ps - margin);
        if (!tissue[static_cast<std::size_t>(cy) * W +
                    static_cast<std::size_t>(cx)])
          continue;
        bool overlaps = false;
        for (const Planted& p : placed) {
          const double dx = p.cx - cx, dy = p.cy - cy;
          const double min_d = p.r + rmax + 2.0;
          if (dx * dx + dy * dy < min_d * min_d) {
            overlaps = true;
            break;
          }
        }
        if (overlaps) continue;
        const int jitter = static_cast<int>(nuc_rng.uniform_int(-8, 8));
        draw_ellipse(img, cx, cy, rx, ry, angle,
                     clamp_u8(80 + shift + jitter),
                     clamp_u8(60 + shift + jitter),
                     clamp_u8(140 + shift + jitter));
        placed.push_back({cx, cy, rmax});
        ok = true;
      }
      if (ok) ++cells[ci].count;
    }
  }

  // Pyramid: halve (ceil) until the longer side fits one tile.
  SlideManifest m;
  m.width = W;
  m.height = H;
  m.tile_size = cfg.tile_size;
  m.tile_path_pattern = name + "_tiles/l{level}_c{col}_r{row}.png";
  m.label = cfg.label;
  m.center_id = cfg.center_id;

  RgbTile plane = img;
  int downsample = 1;
  int level = 0;
  while (true) {
    m.levels.push_back({level, downsample});
    const int ts = cfg.tile_size;
    const int cols = (plane.width + ts - 1) / ts;
    const int rows = (plane.height + ts - 1) / ts;
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        RgbTile t;
        t.width = std::min(ts, plane.width - col * ts);
        t.height = std::min(ts, plane.height - row * ts);
        t.pixels.resize(static_cast<std::size_t>(t.width) * t.height * 3);
        for (int y = 0; y < t.height; ++y) {
          std::memcpy(t.at(0, y), plane.at(col * ts, row * ts + y),
                      static_cast<std::size_t>(t.width) * 3);
        }
        std::string tp = name + "_tiles/l" + std::to_string(level) + "_c" +
                         std::to_string(col) + "_r" + std::to_string(row) +
                         ".png";
        write_png(out_dir / tp, t);
      }
    }
    if (std::max(plane.width, plane.height) <= ts) break;
    plane = box_downsample(plane, (plane.width + 1) / 2,
                           (plane.height + 1) / 2);
    downsample *= 2;
    ++level;
  }

  const auto manifest_path = out_dir / (name + ".json");
  write_slide_manifest(manifest_path, m);

  // Ground truth: tissue mask at thumbnail scale (same binning as
  // SlideHandle::thumbnail) and realized per-cell counts.
  GroundTruth truth;
  truth.label = cfg.label;
  truth.center_id = cfg.center_id;
  truth.patch_counts = cells;
  {
    const std::int64_t longer = std::max(W, H);
    int out_w, out_h;
    if (longer <= cfg.thumb_max_dim) {
      out_w = static_cast<int>(W);
      out_h = static_cast<int>(H);
    } else {
      const double s =
          static_cast<double>(cfg.thumb_max_dim) / static_cast<double>(longer);
      out_w = std::max(1, static_cast<int>(std::llround(W * s)));
      out_h = std::max(1, static_cast<int>(std::llround(H * s)));
    }
    truth.mask_width = out_w;
    truth.mask_height = out_h;
    std::vector<std::int64_t> on(static_cast<std::size_t>(out_w) * out_h, 0);
    std::vector<std::int64_t> tot(static_cast<std::size_t>(out_w) * out_h, 0);
    for (std::int64_t y = 0; y < H; ++y) {
      const int oy = static_cast<int>(y * out_h / H);
      for (std::int64_t x = 0; x < W; ++x) {
        const int ox = static_cast<int>(x * out_w / W);
        const std::size_t o = static_cast<std::size_t>(oy) * out_w + ox;
        on[o] += tissue[static_cast<std::size_t>(y) * W + x];
        ++tot[o];
      }
    }
    truth.mask.resize(on.size());
    for (std::size_t o = 0; o < on.size(); ++o) {
      truth.mask[o] = (2 * on[o] >= tot[o]) ? 1 : 0;
    }
  }
  const auto truth_path = out_dir / (name + ".truth.json");
  write_ground_truth(truth_path, truth);

  return {manifest_path, truth_path, truth};
}

void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& t) {
  nlohmann::json j;
  j["label"] = t.label;
  j["center_id"] = t.center_id;
  nlohmann::json mask;
  mask["width"] = t.mask_width;
  mask["height"] = t.mask_height;
  nlohmann::json rows = nlohmann::json::array();
  for (int y = 0; y < t.mask_height; ++y) {
    std::string row(static_cast<std::size_t>(t.mask_width), '0');
    for (int x = 0; x < t.mask_width; ++x) {
      if (t.mask[static_cast<std::size_t>(y) * t.mask_width + x]) row[x] = '1';
    }
    rows.push_back(row);
  }
  mask["rows"] = rows;
  j["mask"] = mask;
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& c : t.patch_counts) {
    counts.push_back({{"x", c.x}, {"y", c.y}, {"count", c.count}});
  }
  j["patch_counts"] = counts;
  write_file_atomic(path.string(), j.dump(2) + "\n");
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path.string()));
  GroundTruth t;
  t.label = j.at("label").get<std::string>();
  t.center_id = j.at("center_id").get<std::string>();
  t.mask_width = j.at("mask").at("width").get<int>();
  t.mask_height = j.at("mask").at("height").get<int>();
  t.mask.assign(static_cast<std::size_t>(t.mask_width) * t.mask_height, 0);
  const auto& rows = j.at("mask").at("rows");
  for (int y = 0; y < t.mask_height; ++y) {
    const std::string row = rows.at(y).get<std::string>();
    for (int x = 0; x < t.mask_width; ++x) {
      t.mask[static_cast<std::size_t>(y) * t.mask_width + x] =
          row.at(x) == '1' ? 1 : 0;
    }
  }
  for (const auto& c : j.at("patch_counts")) {
    t.patch_counts.push_back({c.at("x").get<std::int64_t>(),
                              c.at("y").get<std::int64_t>(),
                              c.at("count").get<int>()});
  }
  return t;
}

int center_color_shift(int center_index) {
  return ((center_index * 7) % 11) - 5;
}

std::vector<DatasetEntry> generate_dataset(
    const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const int n = spec.slides_per_class;
  const int classes = static_cast<int>(spec.class_names.size());
  const int total = n * classes;

  std::vector<SynthConfig> cfgs(static_cast<std::size_t>(total));
  std::vector<std::string> names(static_cast<std::size_t>(total));
  std::vector<DatasetEntry> entries(static_cast<std::size_t>(total));
  Rng root(spec.base.seed);
  for (int c = 0; c < classes; ++c) {
    for (int j = 0; j < n; ++j) {
      const int i = c * n + j;
      const int center_index = j % static_cast<int>(spec.centers.size());
      SynthConfig cfg = spec.base;
      cfg.seed = root.substream("synth", static_cast<std::uint64_t>(i)).key();
      cfg.label = spec.class_names[c];
      cfg.center_id = spec.centers[center_index];
      cfg.color_shift = center_color_shift(center_index);
      if (static_cast<int>(spec.density_per_class.size()) > c)
        cfg.nucleus_density = spec.density_per_class[c];
      if (static_cast<int>(spec.hotspot_density_per_class.size()) > c)
        cfg.hotspot_density = spec.hotspot_density_per_class[c];
      if (static_cast<int>(spec.hotspot_cells_per_class.size()) > c)
        cfg.hotspot_cells = spec.hotspot_cells_per_class[c];
      if (static_cast<int>(spec.texture_per_class.size()) > c)
        cfg.texture_contrast = spec.texture_per_class[c];
      char buf[32];
      std::snprintf(buf, sizeof(buf), "slide_%03d", i);
      cfgs[i] = cfg;
      names[i] = buf;
      entries[i] = {std::string(buf) + ".json", cfg.label, cfg.center_id};
    }
  }

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < total; ++i) {
    generate_synthetic_slide(cfgs[i], out_dir, names[i]);
  }

  write_dataset_manifest(out_dir / "dataset.json", entries);
  return entries;
}

void write_dataset_manifest(const std::filesystem::path& path,
                            const std::vector<DatasetEntry>& entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"manifest_path", e.manifest_path},
                   {"label", e.label},
                   {"center_id", e.center_id}});
  }
  write_file_atomic(path.string(), arr.dump(2) + "\n");
}

std::vector<DatasetEntry> read_dataset_manifest(
    const std::filesystem::path& path) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(read_file(path.string()));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_manifest, path.string() + ": " + e.what());
  }
  if (!arr.is_array())
    raise(Errc::malformed_manifest, path.string() + ": expected an array");
  std::vector<DatasetEntry> out;
  for (const auto& e : arr) {
    try {
      out.push_back({e.at("manifest_path").get<std::string>(),
                     e.at("label").get<std::string>(),
                     e.value("center_id", std::string())});
    } catch (const nlohmann::json::exception& ex) {
      raise(Errc::malformed_manifest, path.string() + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace fvs

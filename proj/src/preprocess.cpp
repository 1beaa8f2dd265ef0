#include "fvs/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fvs/imgproc.hpp"
#include "fvs/numio.hpp"
#include "fvs/rng.hpp"

namespace fvs {

void SelectionConfig::validate() const {
  if (n_patches < 1)
    raise(Errc::malformed_config, "n_patches must be >= 1");
  if (stride < 1) raise(Errc::malformed_config, "stride must be >= 1");
  if (patch_size < 1)
    raise(Errc::malformed_config, "patch_size must be >= 1");
  if (min_tissue_fraction < 0.0 || min_tissue_fraction > 1.0)
    raise(Errc::malformed_config, "min_tissue_fraction must be in [0,1]");
  if (blur_threshold < 0.0)
    raise(Errc::malformed_config, "blur_threshold must be >= 0");
  if (brightness_low > brightness_high)
    raise(Errc::malformed_config, "brightness bounds out of order");
}

StainMatrix StainMatrix::standard_he() {
  StainMatrix s;
  s.od[0] = {0.65, 0.70, 0.29};
  s.od[1] = {0.07, 0.99, 0.11};
  // Residual: normalized cross product of the two stains.
  const auto& h = s.od[0];
  const auto& e = s.od[1];
  std::array<double, 3> r = {h[1] * e[2] - h[2] * e[1],
                             h[2] * e[0] - h[0] * e[2],
                             h[0] * e[1] - h[1] * e[0]};
  for (auto* row : {&s.od[0], &s.od[1], &r}) {
    const double n = std::sqrt((*row)[0] * (*row)[0] + (*row)[1] * (*row)[1] +
                               (*row)[2] * (*row)[2]);
    for (double& v : *row) v /= n;
  }
  s.od[2] = r;
  return s;
}

namespace {

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<std::array<double, 3>, 3> inverse3(
    const std::array<std::array<double, 3>, 3>& m) {
  const double d = det3(m);
  std::array<std::array<double, 3>, 3> inv;
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  return inv;
}

double norm3(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace

void StainMatrix::validate() const {
  for (const auto& row : od) {
    if (std::abs(norm3(row) - 1.0) > 1e-6)
      raise(Errc::malformed_config, "stain rows must be unit norm");
  }
  if (std::abs(det3(od)) < 1e-6)
    raise(Errc::malformed_config, "stain matrix is singular");
}

std::array<std::array<double, 3>, 3> StainMatrix::unmix_rows() const {
  // od_pixel = S^T c  =>  c = (S^T)^-1 od = (S^-1)^T od.
  const auto inv = inverse3(od);
  std::array<std::array<double, 3>, 3> rows;
  for (int k = 0; k < 3; ++k) {
    rows[k] = {inv[0][k], inv[1][k], inv[2][k]};
  }
  return rows;
}

TissueMaskResult tissue_mask(const RgbTile& thumbnail) {
  if (!thumbnail.valid())
    raise(Errc::shape_mismatch, "empty thumbnail");
  TissueMaskResult res;
  res.mask.width = thumbnail.width;
  res.mask.height = thumbnail.height;
  res.mask.bits.assign(
      static_cast<std::size_t>(thumbnail.width) * thumbnail.height, 0);

  const std::vector<double> sat = saturation(thumbnail);
  const Histogram256 hist = histogram256(sat, 0.0, 1.0);
  const auto thr = otsu_threshold(hist);
  if (!thr) {
    // Constant saturation: Otsu is undefined. Fall back to an absolute
    // floor so plain white stays background and saturated color counts as
    // tissue.
    res.degenerate_histogram = true;
    const double floor_sat = 0.05;
    const bool on = !sat.empty() && sat[0] > floor_sat;
    if (on) std::fill(res.mask.bits.begin(), res.mask.bits.end(), 1);
    return res;
  }
  const double cut = (static_cast<double>(*thr) + 1.0) / 256.0;
  for (std::size_t i = 0; i < sat.size(); ++i) {
    res.mask.bits[i] = sat[i] >= cut ? 1 : 0;
  }
  fill_small_holes(res.mask.bits, res.mask.width, res.mask.height, 64);
  return res;
}

std::vector<PatchRecord> generate_patch_grid(const SlideHandle& slide,
                                             const BinaryMask& mask,
                                             const SelectionConfig& cfg) {
  const std::int64_t W = slide.width(), H = slide.height();
  const double sx = static_cast<double>(W) / mask.width;
  const double sy = static_cast<double>(H) / mask.height;
  std::vector<PatchRecord> out;
  for (std::int64_t y = 0; y + cfg.patch_size <= H; y += cfg.stride) {
    for (std::int64_t x = 0; x + cfg.patch_size <= W; x += cfg.stride) {
      // Project the patch rectangle onto the mask grid.
      const int mx0 = std::clamp(
          static_cast<int>(std::floor(x / sx)), 0, mask.width - 1);
      const int my0 = std::clamp(
          static_cast<int>(std::floor(y / sy)), 0, mask.height - 1);
      const int mx1 = std::clamp(
          static_cast<int>(std::ceil((x + cfg.patch_size) / sx)), mx0 + 1,
          mask.width);
      const int my1 = std::clamp(
          static_cast<int>(std::ceil((y + cfg.patch_size) / sy)), my0 + 1,
          mask.height);
      std::int64_t on = 0;
      for (int my = my0; my < my1; ++my) {
        for (int mx = mx0; mx < mx1; ++mx) {
          on += mask.bits[static_cast<std::size_t>(my) * mask.width + mx];
        }
      }
      const double frac = static_cast<double>(on) /
                          (static_cast<double>(mx1 - mx0) * (my1 - my0));
      if (frac >= cfg.min_tissue_fraction) {
        PatchRecord r;
        r.x = x;
        r.y = y;
        r.size = cfg.patch_size;
        r.tissue_fraction = frac;
        out.push_back(r);
      }
    }
  }
  return out;
}

QualityResult quality_filter(const RgbTile& patch,
                             const SelectionConfig& cfg) {
  QualityResult q;
  const std::vector<double> gray = to_gray(patch);
  q.blur_score = laplacian_variance(gray, patch.width, patch.height);
  q.mean_brightness =
      std::accumulate(gray.begin(), gray.end(), 0.0) /
      static_cast<double>(gray.size());
  q.pass = q.blur_score >= cfg.blur_threshold &&
           q.mean_brightness >= cfg.brightness_low &&
           q.mean_brightness <= cfg.brightness_high;
  return q;
}

int nucleus_count(const RgbTile& patch, const StainMatrix& stains) {
  if (!patch.valid()) return 0;
  const auto unmix = stains.unmix_rows();
  const auto& hrow = unmix[0];
  const std::size_t n = static_cast<std::size_t>(patch.width) * patch.height;
  std::vector<double> hema(n);
  double hmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = patch.pixels.data() + i * 3;
    double c = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      const double od = -std::log10((static_cast<double>(p[ch]) + 1.0) / 256.0);
      c += hrow[ch] * od;
    }
    hema[i] = std::max(c, 0.0);
    hmax = std::max(hmax, hema[i]);
  }
  if (hmax <= 0.0) return 0;

  const Histogram256 hist = histogram256(hema, 0.0, hmax);
  const auto thr = otsu_threshold(hist);
  if (!thr) return 0;
  const double cut = (static_cast<double>(*thr) + 1.0) * hmax / 256.0;
  std::vector<std::uint8_t> bin(n, 0);
  for (std::size_t i = 0; i < n; ++i) bin[i] = hema[i] >= cut ? 1 : 0;

  binary_open_3x3(bin, patch.width, patch.height);
  std::vector<std::int64_t> areas;
  connected_components8(bin, patch.width, patch.height, areas);
  int count = 0;
  for (std::int64_t a : areas) {
    if (a >= kNucleusMinArea) ++count;
  }
  return count;
}

std::vector<PatchRecord> select_patches(const std::vector<PatchRecord>& records,
                                        const SelectionConfig& cfg) {
  if (records.empty())
    raise(Errc::empty_candidate_set, "no patches passed filtering");
  std::vector<PatchRecord> out;
  if (cfg.mode == SelectionConfig::Mode::cellularity) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = records[a];
      const auto& rb = records[b];
      if (ra.nucleus_count != rb.nucleus_count)
        return ra.nucleus_count > rb.nucleus_count;
      if (ra.y != rb.y) return ra.y < rb.y;
      return ra.x < rb.x;
    });
    const std::size_t n =
        std::min<std::size_t>(records.size(), static_cast<std::size_t>(cfg.n_patches));
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(records[order[i]]);
      out.back().selected = true;
    }
  } else {
    std::vector<std::size_t> pool(records.size());
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng = Rng(cfg.seed).substream("selection");
    std::vector<std::size_t> chosen;
    const std::size_t n =
        std::min<std::size_t>(records.size(), static_cast<std::size_t>(cfg.n_patches));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
      chosen.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    // Emit in (y, x) order so output files are stable and auditable.
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
      if (records[a].y != records[b].y) return records[a].y < records[b].y;
      return records[a].x < records[b].x;
    });
    for (std::size_t i : chosen) {
      out.push_back(records[i]);
      out.back().selected = true;
    }
  }
  return out;
}

void score_patches(const SlideHandle& slide, std::vector<PatchRecord>& records,
                   const SelectionConfig& cfg, const StainMatrix& stains) {
  const int n = static_cast<int>(records.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    PatchRecord& r = records[i];
    const RgbTile patch = slide.read_region(0, r.x, r.y, r.size, r.size);
    const QualityResult q = quality_filter(patch, cfg);
    r.blur_score = q.blur_score;
    r.mean_brightness = q.mean_brightness;
    r.quality_pass = q.pass;
    r.nucleus_count = q.pass ? nucleus_count(patch, stains) : 0;
  }
}

std::vector<PatchRecord> run_preprocess(const SlideHandle& slide,
                                        const SelectionConfig& cfg,
                                        const StainMatrix& stains,
                                        int thumb_max_dim) {
  cfg.validate();
  const RgbTile thumb = slide.thumbnail(thumb_max_dim);
  const TissueMaskResult tm = tissue_mask(thumb);
  std::vector<PatchRecord> records = generate_patch_grid(slide, tm.mask, cfg);
  score_patches(slide, records, cfg, stains);

  std::vector<PatchRecord> candidates;
  for (const auto& r : records) {
    if (r.quality_pass) candidates.push_back(r);
  }
  const std::vector<PatchRecord> chosen = select_patches(candidates, cfg);
  for (auto& r : records) {
    for (const auto& c : chosen) {
      if (c.x == r.x && c.y == r.y) {
        r.selected = true;
        break;
      }
    }
  }
  return records;
}

void write_patches_csv(const std::filesystem::path& path,
                       std::span<const PatchRecord> records) {
  std::ostringstream ss;
  ss << "x,y,size,tissue_fraction,blur_score,mean_brightness,nucleus_count,"
        "selected\n";
  for (const auto& r : records) {
    ss << r.x << ',' << r.y << ',' << r.size << ',' << format_g17(r.tissue_fraction)
       << ',' << format_g17(r.blur_score) << ',' << format_g17(r.mean_brightness)
       << ',' << r.nucleus_count << ',' << (r.selected ? 1 : 0) << '\n';
  }
  write_file_atomic(path.string(), ss.str());
}

std::vector<PatchRecord> read_patches_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) raise(Errc::file_not_found, path.string());
  std::string line;
  if (!std::getline(f, line))
    raise(Errc::malformed_row, path.string() + ": empty file");
  std::vector<PatchRecord> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split_csv_line(line);
    if (parts.size() != 8)
      raise(Errc::malformed_row,
            path.string() + " line " + std::to_string(lineno));
    const std::string ctx = path.string() + " line " + std::to_string(lineno);
    PatchRecord r;
    r.x = static_cast<std::int64_t>(
        parse_double(parts[0], Errc::malformed_row, ctx));
    r.y = static_cast<std::int64_t>(
        parse_double(parts[1], Errc::malformed_row, ctx));
    r.size = static_cast<int>(parse_double(parts[2], Errc::malformed_row, ctx));
    r.tissue_fraction = parse_double(parts[3], Errc::malformed_row, ctx);
    r.blur_score = parse_double(parts[4], Errc::malformed_row, ctx);
    r.mean_brightness = parse_double(parts[5], Errc::malformed_row, ctx);
    r.nucleus_count =
        static_cast<int>(parse_double(parts[6], Errc::malformed_row, ctx));
    r.selected = parts[7] == "1";
    out.push_back(r);
  }
  return out;
}

}  // namespace fvs

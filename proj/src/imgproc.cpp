#include "fvs/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace fvs {

std::vector<double> to_gray(const RgbTile& img) {
  std::vector<double> g(static_cast<std::size_t>(img.width) * img.height);
  const std::uint8_t* p = img.pixels.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = 0.299 * p[3 * i] + 0.587 * p[3 * i + 1] + 0.114 * p[3 * i + 2];
  }
  return g;
}

std::vector<double> saturation(const RgbTile& img) {
  std::vector<double> s(static_cast<std::size_t>(img.width) * img.height);
  const std::uint8_t* p = img.pixels.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int r = p[3 * i], g = p[3 * i + 1], b = p[3 * i + 2];
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    s[i] = mx > 0 ? static_cast<double>(mx - mn) / mx : 0.0;
  }
  return s;
}

int Histogram256::occupied() const {
  int n = 0;
  for (auto b : bins) n += (b != 0);
  return n;
}

Histogram256 histogram256(std::span<const double> values, double lo,
                          double hi) {
  Histogram256 h;
  h.lo = lo;
  h.hi = hi;
  const double scale = 256.0 / (hi - lo);
  for (double v : values) {
    int bin = static_cast<int>((std::clamp(v, lo, hi) - lo) * scale);
    bin = std::clamp(bin, 0, 255);
    ++h.bins[bin];
  }
  h.total = values.size();
  return h;
}

std::optional<int> otsu_threshold(const Histogram256& h) {
  if (h.occupied() < 2) return std::nullopt;
  double sum = 0.0;
  for (int i = 0; i < 256; ++i) sum += static_cast<double>(i) * h.bins[i];
  const double total = static_cast<double>(h.total);

  double sum_b = 0.0, w_b = 0.0;
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    w_b += static_cast<double>(h.bins[t]);
    if (w_b == 0.0) continue;
    const double w_f = total - w_b;
    if (w_f == 0.0) break;
    sum_b += static_cast<double>(t) * h.bins[t];
    const double m_b = sum_b / w_b;
    const double m_f = (sum - sum_b) / w_f;
    const double var_between = w_b * w_f * (m_b - m_f) * (m_b - m_f);
    if (var_between > best) {
      best = var_between;
      best_t = t;
    }
  }
  return best_t;
}

double laplacian_variance(std::span<const double> gray, int w, int h) {
  if (w < 3 || h < 3) return 0.0;
  const std::int64_t n = static_cast<std::int64_t>(w - 2) * (h - 2);
  double mean = 0.0;
  std::vector<double> lap(static_cast<std::size_t>(n));
  std::size_t k = 0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double v = 4.0 * gray[i] - gray[i - 1] - gray[i + 1] -
                       gray[i - w] - gray[i + w];
      lap[k++] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : lap) var += (v - mean) * (v - mean);
  return var / static_cast<double>(n);
}

void binary_open_3x3(std::vector<std::uint8_t>& mask, int w, int h) {
  std::vector<std::uint8_t> eroded(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool all = true;
      for (int dy = -1; dy <= 1 && all; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h ||
              !mask[static_cast<std::size_t>(ny) * w + nx]) {
            all = false;
            break;
          }
        }
      }
      eroded[static_cast<std::size_t>(y) * w + x] = all ? 1 : 0;
    }
  }
  std::fill(mask.begin(), mask.end(), std::uint8_t{0});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!eroded[static_cast<std::size_t>(y) * w + x]) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < w && ny < h)
            mask[static_cast<std::size_t>(ny) * w + nx] = 1;
        }
      }
    }
  }
}

std::vector<std::int32_t> connected_components8(
    const std::vector<std::uint8_t>& mask, int w, int h,
    std::vector<std::int64_t>& areas) {
  std::vector<std::int32_t> labels(mask.size(), 0);
  areas.clear();
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels[start]) continue;
    ++next;
    std::int64_t area = 0;
    stack.push_back(start);
    labels[start] = next;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++area;
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          if (mask[j] && !labels[j]) {
            labels[j] = next;
            stack.push_back(j);
          }
        }
      }
    }
    areas.push_back(area);
  }
  return labels;
}

void fill_small_holes(std::vector<std::uint8_t>& mask, int w, int h,
                      std::int64_t max_area) {
  // Label 4-connected background components; any that never touches the
  // border is a hole.
  std::vector<std::int32_t> labels(mask.size(), 0);
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  std::vector<std::int64_t> areas;
  std::vector<bool> touches_border;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (mask[start] || labels[start]) continue;
    ++next;
    std::int64_t area = 0;
    bool border = false;
    stack.push_back(start);
    labels[start] = next;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++area;
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) border = true;
      constexpr int dx4[] = {1, -1, 0, 0};
      constexpr int dy4[] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        const int nx = x + dx4[d], ny = y + dy4[d];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (!mask[j] && !labels[j]) {
          labels[j] = next;
          stack.push_back(j);
        }
      }
    }
    areas.push_back(area);
    touches_border.push_back(border);
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const std::int32_t l = labels[i];
    if (l && !touches_border[l - 1] && areas[l - 1] <= max_area) mask[i] = 1;
  }
}

RgbTile box_downsample(const RgbTile& img, int out_w, int out_h) {
  RgbTile out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.resize(static_cast<std::size_t>(out_w) * out_h * 3);
  std::vector<std::uint64_t> sums(static_cast<std::size_t>(out_w) * out_h * 3,
                                  0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(out_w) * out_h,
                                    0);
  for (int y = 0; y < img.height; ++y) {
    const int oy = static_cast<int>(static_cast<std::int64_t>(y) * out_h /
                                    img.height);
    for (int x = 0; x < img.width; ++x) {
      const int ox = static_cast<int>(static_cast<std::int64_t>(x) * out_w /
                                      img.width);
      const std::uint8_t* p = img.at(x, y);
      const std::size_t o = static_cast<std::size_t>(oy) * out_w + ox;
      sums[o * 3] += p[0];
      sums[o * 3 + 1] += p[1];
      sums[o * 3 + 2] += p[2];
      ++counts[o];
    }
  }
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

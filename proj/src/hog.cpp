#include "robench/hog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

namespace {

std::size_t idx(int a, int b, int stride) {
  return static_cast<std::size_t>(b) * static_cast<std::size_t>(stride) +
         static_cast<std::size_t>(a);
}

struct Tap {
  int index;
  double weight;
};

// Normalized overlap weights of each output sample with the input samples.
std::vector<std::vector<Tap>> area_taps(int in, int out) {
  const double scale = static_cast<double>(in) / out;
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  for (int o = 0; o < out; ++o) {
    const double a = o * scale, b = (o + 1) * scale;
    for (int i = static_cast<int>(a); i < std::min(in, static_cast<int>(std::ceil(b))); ++i) {
      const double w = std::min<double>(i + 1, b) - std::max<double>(i, a);
      if (w > 0.0) taps[static_cast<std::size_t>(o)].push_back({i, w / scale});
    }
  }
  return taps;
}

void check_window(const Plane& plane, int x0, int y0, int w, int h) {
  if (w < 1 || h < 1 || x0 < 0 || y0 < 0 || x0 + w > plane.width || y0 + h > plane.height)
    throw ArgumentError(fmt::format("window {}x{} at ({}, {}) is outside the {}x{} image", w, h,
                                    x0, y0, plane.width, plane.height));
}

// atan on [0,1], polynomial with |error| < 1.2e-5 rad. Plain arithmetic keeps
// the orientation identical on every platform, unlike libm's atan2.
double atan_unit(double z) {
  const double z2 = z * z;
  return z * (0.9998660 + z2 * (-0.3302995 + z2 * (0.1801410 + z2 * (-0.0851330 + z2 * 0.0208351))));
}

}  // namespace

double unsigned_orientation(double gx, double gy) {
  if (gy < 0.0 || (gy == 0.0 && gx < 0.0)) {
    gx = -gx;
    gy = -gy;
  }
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  double a;
  if (gx >= 0.0)
    a = gy <= gx ? (gx == 0.0 ? 0.0 : atan_unit(gy / gx)) : kHalfPi - atan_unit(gx / gy);
  else
    a = gy >= -gx ? kHalfPi + atan_unit(-gx / gy) : std::numbers::pi - atan_unit(gy / -gx);
  return a >= std::numbers::pi ? 0.0 : a;
}

std::vector<double> cell_histograms(const Plane& plane, int x0, int y0, int cells_x,
                                    int cells_y) {
  std::vector<double> hist(static_cast<std::size_t>(cells_x) * static_cast<std::size_t>(cells_y) *
                           kHogBins);
  constexpr double kBinWidth = std::numbers::pi / kHogBins;
  const int w = cells_x * kHogCell;
  for (int v = 0; v < cells_y * kHogCell; ++v) {
    const int y = y0 + v;
    const double* up = &plane.values[idx(0, std::clamp(y - 1, 0, plane.height - 1), plane.width)];
    const double* mid = &plane.values[idx(0, std::clamp(y, 0, plane.height - 1), plane.width)];
    const double* down = &plane.values[idx(0, std::clamp(y + 1, 0, plane.height - 1), plane.width)];
    double* h_row = hist.data() + idx(0, v / kHogCell, cells_x) * kHogBins;
    for (int u = 0; u < w; ++u) {
      const int x = x0 + u;
      const double gx = mid[std::min(x + 1, plane.width - 1)] - mid[std::max(x - 1, 0)];
      const double gy = down[x] - up[x];
      if (gx == 0.0 && gy == 0.0) continue;
      const double mag = std::sqrt(gx * gx + gy * gy);
      const double angle = unsigned_orientation(gx, gy);
      // Bin centres sit at (b + 1/2)·20°; orientation wraps around.
      const double pos = angle / kBinWidth - 0.5;
      const double fl = std::floor(pos);
      const double frac = pos - fl;
      const int b0 = (static_cast<int>(fl) + kHogBins) % kHogBins;
      const int b1 = (b0 + 1) % kHogBins;
      double* h = h_row + static_cast<std::size_t>(u / kHogCell) * kHogBins;
      h[b0] += (1.0 - frac) * mag;
      h[b1] += frac * mag;
    }
  }
  return hist;
}

HogDescriptor normalize_blocks(std::span<const double> cells, int cells_x, int cells_y) {
  HogDescriptor d;
  d.blocks_x = std::max(0, cells_x - kHogBlock + 1);
  d.blocks_y = std::max(0, cells_y - kHogBlock + 1);
  d.values.resize(static_cast<std::size_t>(d.blocks_x) * static_cast<std::size_t>(d.blocks_y) *
                  kHogBlockLength);
  for (int by = 0; by < d.blocks_y; ++by)
    for (int bx = 0; bx < d.blocks_x; ++bx) {
      double* out = d.values.data() + idx(bx, by, d.blocks_x) * kHogBlockLength;
      int k = 0;
      for (int dy = 0; dy < kHogBlock; ++dy)
        for (int dx = 0; dx < kHogBlock; ++dx) {
          const double* h = cells.data() + idx(bx + dx, by + dy, cells_x) * kHogBins;
          for (int b = 0; b < kHogBins; ++b) out[k++] = h[b];
        }
      double sq = 0.0;
      for (int i = 0; i < kHogBlockLength; ++i) sq += out[i] * out[i];
      if (sq == 0.0) continue;
      const double n1 = std::sqrt(sq + kHogEpsilon * kHogEpsilon);
      sq = 0.0;
      for (int i = 0; i < kHogBlockLength; ++i) {
        out[i] = std::min(out[i] / n1, kHogClip);
        sq += out[i] * out[i];
      }
      const double n2 = std::sqrt(sq);
      for (int i = 0; i < kHogBlockLength; ++i) out[i] /= n2;
    }
  return d;
}

HogDescriptor hog(const Plane& plane, int x0, int y0, int cells_x, int cells_y) {
  if (cells_x < kHogBlock || cells_y < kHogBlock)
    throw ArgumentError(fmt::format("window must span at least {} cells per side", kHogBlock));
  check_window(plane, x0, y0, cells_x * kHogCell, cells_y * kHogCell);
  const auto cells = cell_histograms(plane, x0, y0, cells_x, cells_y);
  return normalize_blocks(cells, cells_x, cells_y);
}

HogDescriptor hog(const Image& img, int x0, int y0, int cells_x, int cells_y) {
  return hog(luma_plane(img), x0, y0, cells_x, cells_y);
}

HogFeatureMap::HogFeatureMap(const Plane& plane)
    : cells_x_(plane.width / kHogCell), cells_y_(plane.height / kHogCell) {
  const auto cells = cell_histograms(plane, 0, 0, cells_x_, cells_y_);
  blocks_ = normalize_blocks(cells, cells_x_, cells_y_);
}

std::span<const double> HogFeatureMap::block(int bx, int by) const {
  return std::span(blocks_.values).subspan(idx(bx, by, blocks_.blocks_x) * kHogBlockLength,
                                           kHogBlockLength);
}

HogDescriptor HogFeatureMap::window(int cell_x, int cell_y, int cells_w, int cells_h) const {
  if (cells_w < kHogBlock || cells_h < kHogBlock || cell_x < 0 || cell_y < 0 ||
      cell_x + cells_w > cells_x_ || cell_y + cells_h > cells_y_)
    throw ArgumentError(fmt::format("window of {}x{} cells at cell ({}, {}) is outside the map",
                                    cells_w, cells_h, cell_x, cell_y));
  HogDescriptor d;
  d.blocks_x = cells_w - kHogBlock + 1;
  d.blocks_y = cells_h - kHogBlock + 1;
  d.values.reserve(static_cast<std::size_t>(d.blocks_x * d.blocks_y) * kHogBlockLength);
  for (int by = 0; by < d.blocks_y; ++by)
    for (int bx = 0; bx < d.blocks_x; ++bx) {
      const auto b = block(cell_x + bx, cell_y + by);
      d.values.insert(d.values.end(), b.begin(), b.end());
    }
  return d;
}

Plane smooth(const Plane& plane, int passes) {
  if (passes < 0) throw ArgumentError("smoothing passes must be non-negative");
  Plane a = plane;
  Plane b = plane;
  const int w = plane.width, h = plane.height;
  auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  };
  for (int p = 0; p < passes; ++p) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        b.values[idx(x, y)] = 0.25 * (a.values[idx(std::max(x - 1, 0), y)] +
                                      2.0 * a.values[idx(x, y)] +
                                      a.values[idx(std::min(x + 1, w - 1), y)]);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        a.values[idx(x, y)] = 0.25 * (b.values[idx(x, std::max(y - 1, 0))] +
                                      2.0 * b.values[idx(x, y)] +
                                      b.values[idx(x, std::min(y + 1, h - 1))]);
  }
  return a;
}

Plane resample(const Plane& plane, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1)
    throw ArgumentError(fmt::format("invalid resample size {}x{}", out_width, out_height));
  Plane out{out_width, out_height,
            std::vector<double>(static_cast<std::size_t>(out_width) *
                                static_cast<std::size_t>(out_height))};
  const double sx = static_cast<double>(plane.width) / out_width;
  const double sy = static_cast<double>(plane.height) / out_height;

  if (sx >= 1.0 && sy >= 1.0) {
    // Separable area average: output pixel x covers [x·sx, (x+1)·sx) of the input.
    const auto wx = area_taps(plane.width, out_width);
    const auto wy = area_taps(plane.height, out_height);
    std::vector<double> rows(static_cast<std::size_t>(out_width) *
                             static_cast<std::size_t>(plane.height));
    for (int y = 0; y < plane.height; ++y)
      for (int x = 0; x < out_width; ++x) {
        double sum = 0.0;
        for (const auto& t : wx[static_cast<std::size_t>(x)]) sum += t.weight * plane.at(t.index, y);
        rows[idx(x, y, out_width)] = sum;
      }
    for (int y = 0; y < out_height; ++y)
      for (int x = 0; x < out_width; ++x) {
        double sum = 0.0;
        for (const auto& t : wy[static_cast<std::size_t>(y)]) sum += t.weight * rows[idx(x, t.index, out_width)];
        out.values[idx(x, y, out_width)] = sum;
      }
    return out;
  }

  // Bilinear with pixel-centre alignment.
  for (int y = 0; y < out_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, plane.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, plane.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, plane.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, plane.width - 1);
      const double tx = fx - x0;
      const double top = plane.at(x0, y0) + (plane.at(x1, y0) - plane.at(x0, y0)) * tx;
      const double bottom = plane.at(x0, y1) + (plane.at(x1, y1) - plane.at(x0, y1)) * tx;
      out.values[idx(x, y, out_width)] = top + (bottom - top) * ty;
    }
  }
  return out;
}

Plane crop(const Plane& plane, int x0, int y0, int width, int height) {
  check_window(plane, x0, y0, width, height);
  Plane out{width, height, {}};
  out.values.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.values.push_back(plane.at(x0 + x, y0 + y));
  return out;
}

}  // namespace robench

#pragma once

#include <span>
#include <vector>

#include "robench/image.hpp"

namespace robench {

inline constexpr int kHogCell = 8;
inline constexpr int kHogBins = 9;
inline constexpr int kHogBlock = 2;  // cells per block side
inline constexpr int kHogBlockLength = kHogBlock * kHogBlock * kHogBins;  // 36
inline constexpr double kHogClip = 0.2;
/// Added (squared) to the block norm before the first normalization, in
/// gradient units of the 0..255 scale; keeps near-flat blocks near zero.
inline constexpr double kHogEpsilon = 1.0;

/// Concatenated 36-value block features of a window, block rows first.
struct HogDescriptor {
  int blocks_x = 0;
  int blocks_y = 0;
  std::vector<double> values;

  friend bool operator==(const HogDescriptor&, const HogDescriptor&) = default;
};

/// Orientation of a gradient folded to [0, π).
double unsigned_orientation(double gx, double gy);

/// Unnormalized 9-bin histograms of a grid of cells whose top-left pixel is
/// (x0, y0). Gradients are centred differences; samples outside the plane
/// replicate the nearest border pixel. Each pixel's magnitude is split
/// linearly between the two orientation bins nearest its unsigned angle.
std::vector<double> cell_histograms(const Plane& plane, int x0, int y0, int cells_x, int cells_y);

/// 2×2-cell blocks at one-cell stride: L2 normalization, clipping at 0.2,
/// renormalization. All-zero blocks stay zero.
HogDescriptor normalize_blocks(std::span<const double> cells, int cells_x, int cells_y);

/// Descriptor of the window of `cells_x`×`cells_y` cells at pixel (x0, y0).
/// Throws ArgumentError when the window is not inside the plane.
HogDescriptor hog(const Plane& plane, int x0, int y0, int cells_x, int cells_y);
HogDescriptor hog(const Image& img, int x0, int y0, int cells_x, int cells_y);

/// Block features over the whole plane (the cell grid anchored at (0,0)), so
/// every window on the 8-pixel grid is a gather rather than a recomputation.
class HogFeatureMap {
 public:
  explicit HogFeatureMap(const Plane& plane);

  int cells_x() const noexcept { return cells_x_; }
  int cells_y() const noexcept { return cells_y_; }
  int blocks_x() const noexcept { return blocks_.blocks_x; }
  int blocks_y() const noexcept { return blocks_.blocks_y; }

  /// 36 values of block (bx, by).
  std::span<const double> block(int bx, int by) const;

  /// Same as hog() of the window whose top-left cell is (cell_x, cell_y).
  HogDescriptor window(int cell_x, int cell_y, int cells_w, int cells_h) const;

 private:
  int cells_x_ = 0;
  int cells_y_ = 0;
  HogDescriptor blocks_;
};

/// `passes` rounds of the [1 2 1]/4 kernel along each axis, borders
/// replicated. Two passes approximate a Gaussian of sigma 1.
Plane smooth(const Plane& plane, int passes);

/// Area-weighted reduction or bilinear enlargement of a plane.
Plane resample(const Plane& plane, int out_width, int out_height);

/// Crop of a plane; throws ArgumentError when the rectangle leaves it.
Plane crop(const Plane& plane, int x0, int y0, int width, int height);

}  // namespace robench

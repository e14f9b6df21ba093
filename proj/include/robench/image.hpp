#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace robench {

/// Round half away from zero. Every quantization back to the 8-bit grid
/// goes through this so results are reproducible bit for bit.
inline double round_half_away(double v) { return std::round(v); }

/// Quantizes a value on the 0..255 scale to a byte (clamped, rounded).
inline std::uint8_t to_byte(double raw) {
  if (!(raw > 0.0)) return 0;  // also maps NaN to 0
  if (raw >= 255.0) return 255;
  return static_cast<std::uint8_t>(round_half_away(raw));
}

/// BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// Planar-interleaved 8-bit raster: row-major, channels interleaved per pixel.
/// Channels is 1 (luma) or 3 (RGB).
class Image {
 public:
  Image() = default;
  /// Zero-filled image. Throws ArgumentError on invalid geometry.
  Image(int width, int height, int channels);
  /// Takes ownership of samples; throws SizeError if the count does not match.
  Image(int width, int height, int channels, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t sample_count() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::span<std::uint8_t> samples() noexcept { return samples_; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return samples_[index(x, y, c)];
  }
  std::uint8_t& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }

  /// Sample on the [0,1] scale.
  double normalized(int x, int y, int c = 0) const { return at(x, y, c) / 255.0; }

  std::span<const std::uint8_t> row(int y) const {
    return std::span(samples_).subspan(row_stride() * static_cast<std::size_t>(y), row_stride());
  }
  std::span<std::uint8_t> row(int y) {
    return std::span(samples_).subspan(row_stride() * static_cast<std::size_t>(y), row_stride());
  }
  std::size_t row_stride() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  }

  bool same_shape(const Image& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// Single-channel double-precision plane, used by the detector.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

/// Luma plane on the 0..255 scale (identity for single-channel images).
Plane luma_plane(const Image& img);

}  // namespace robench

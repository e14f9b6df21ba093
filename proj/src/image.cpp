#include "robench/image.hpp"

#include <string>

#include "robench/error.hpp"

namespace robench {

namespace {

void check_geometry(int width, int height, int channels) {
  if (width < 1 || height < 1)
    throw ArgumentError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
  if (channels != 1 && channels != 3)
    throw ArgumentError("image channels must be 1 or 3, got " + std::to_string(channels));
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_geometry(width, height, channels);
  samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                      static_cast<std::size_t>(channels),
                  0);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_geometry(width, height, channels);
  const std::size_t expected = static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(channels);
  if (samples_.size() != expected)
    throw SizeError("image sample count " + std::to_string(samples_.size()) +
                    " does not match geometry (" + std::to_string(expected) + " expected)");
}

Plane luma_plane(const Image& img) {
  Plane p{img.width(), img.height(), {}};
  p.values.resize(static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.height()));
  const auto s = img.samples();
  if (img.channels() == 1) {
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = s[i];
  } else {
    for (std::size_t i = 0; i < p.values.size(); ++i)
      p.values[i] = kLumaR * s[3 * i] + kLumaG * s[3 * i + 1] + kLumaB * s[3 * i + 2];
  }
  return p;
}

}  // namespace robench

#include "robench/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "robench/error.hpp"
#include "robench/hash.hpp"

namespace robench {

std::string_view to_string(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::qp: return "qp";
    case DistortionKind::res: return "res";
    case DistortionKind::wn: return "wn";
    case DistortionKind::bv: return "bv";
  }
  return "?";
}

DistortionKind parse_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  throw ArgumentError(fmt::format("unknown distortion kind '{}'", name));
}

void DistortionSpec::validate() const {
  if (level < 1) throw ArgumentError(fmt::format("distortion level must be >= 1, got {}", level));
  switch (kind) {
    case DistortionKind::qp:
      if (param < 0.0 || param > 65.0 || param != std::floor(param))
        throw ArgumentError(fmt::format("qp must be an integer in [0,65], got {}", param));
      break;
    case DistortionKind::res:
      if (!(param > 0.0 && param <= 1.0))
        throw ArgumentError(fmt::format("resolution scale must be in (0,1], got {}", param));
      break;
    case DistortionKind::wn:
      if (!(param > 0.0 && param <= 1.0))
        throw ArgumentError(fmt::format("noise sigma must be in (0,1], got {}", param));
      break;
    case DistortionKind::bv:
      if (!(param >= -1.0 && param <= 1.0) || param == 0.0)
        throw ArgumentError(
            fmt::format("brightness offset must be in [-1,1] and non-zero, got {}", param));
      break;
  }
}

// ---------------------------------------------------------------------------
// White noise

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(seed);
  const std::uint64_t a = splitmix64(key + 2 * counter);
  const std::uint64_t b = splitmix64(key + 2 * counter + 1);
  constexpr double kUnit = 0x1.0p-53;
  const double u1 = static_cast<double>((a >> 11) + 1) * kUnit;  // (0,1]
  const double u2 = static_cast<double>(b >> 11) * kUnit;        // [0,1)
  // Box-Muller
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed, Exec exec) {
  if (!(sigma > 0.0 && sigma <= 1.0))
    throw ArgumentError(fmt::format("noise sigma must be in (0,1], got {}", sigma));
  Image out(img.width(), img.height(), img.channels());
  const std::size_t stride = img.row_stride();
  for_each_index(exec, img.height(), [&](std::ptrdiff_t y) {
    const auto src = img.row(static_cast<int>(y));
    auto dst = out.row(static_cast<int>(y));
    const std::size_t base = static_cast<std::size_t>(y) * stride;
    for (std::size_t i = 0; i < stride; ++i) {
      const std::size_t idx = base + i;
      const auto [n0, n1] = normal_pair(seed, idx >> 1);
      const double noise = (idx & 1) ? n1 : n0;
      const double v = std::clamp(src[i] / 255.0 + sigma * noise, 0.0, 1.0);
      dst[i] = to_byte(v * 255.0);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Brightness

Image adjust_brightness(const Image& img, double offset, Exec exec) {
  if (!(offset >= -1.0 && offset <= 1.0))
    throw ArgumentError(fmt::format("brightness offset must be in [-1,1], got {}", offset));
  Image out(img.width(), img.height(), img.channels());
  // On the raw scale the offset is a constant shift; adding it there avoids a
  // divide/multiply round trip through the normalized scale.
  const double shift = offset * 255.0;
  for_each_index(exec, img.height(), [&](std::ptrdiff_t y) {
    const auto src = img.row(static_cast<int>(y));
    auto dst = out.row(static_cast<int>(y));
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = to_byte(src[i] + shift);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Resolution

std::pair<int, int> scaled_size(int width, int height, double scale) {
  if (!(scale > 0.0 && scale <= 1.0))
    throw ArgumentError(fmt::format("resolution scale must be in (0,1], got {}", scale));
  const int w = static_cast<int>(round_half_away(width * scale));
  const int h = static_cast<int>(round_half_away(height * scale));
  if (w < 1 || h < 1)
    throw ArgumentError(
        fmt::format("scale {} reduces {}x{} to an empty image", scale, width, height));
  return {w, h};
}

namespace {

struct Tap {
  int index;
  double weight;
};

/// Source taps of each output cell for an area-weighted reduction in -> out.
std::vector<std::vector<Tap>> area_taps(int in, int out) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  const double ratio = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * ratio;
    const double hi = (o + 1 == out) ? in : (o + 1) * ratio;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(in - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int p = first; p <= last; ++p) {
      const double w = std::min<double>(hi, p + 1) - std::max<double>(lo, p);
      if (w > 0.0) taps[static_cast<std::size_t>(o)].push_back({p, w});
    }
  }
  return taps;
}

double tap_sum(const std::vector<Tap>& taps) {
  double s = 0.0;
  for (const auto& t : taps) s += t.weight;
  return s;
}

}  // namespace

Image downscale_to(const Image& img, int out_w, int out_h, Exec exec) {
  if (out_w < 1 || out_h < 1 || out_w > img.width() || out_h > img.height())
    throw ArgumentError(fmt::format("cannot reduce {}x{} to {}x{}", img.width(), img.height(),
                                    out_w, out_h));
  if (out_w == img.width() && out_h == img.height()) return img;

  const int ch = img.channels();
  const auto xtaps = area_taps(img.width(), out_w);
  const auto ytaps = area_taps(img.height(), out_h);

  // Horizontal pass: unnormalized weighted sums per source row.
  std::vector<double> tmp(static_cast<std::size_t>(img.height()) * out_w * ch);
  for_each_index(exec, img.height(), [&](std::ptrdiff_t y) {
    const auto src = img.row(static_cast<int>(y));
    double* dst = tmp.data() + static_cast<std::size_t>(y) * out_w * ch;
    for (int ox = 0; ox < out_w; ++ox)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (const auto& t : xtaps[static_cast<std::size_t>(ox)])
          acc += t.weight * src[static_cast<std::size_t>(t.index) * ch + c];
        dst[static_cast<std::size_t>(ox) * ch + c] = acc;
      }
  });

  Image out(out_w, out_h, ch);
  for_each_index(exec, out_h, [&](std::ptrdiff_t oy) {
    const auto& yt = ytaps[static_cast<std::size_t>(oy)];
    auto dst = out.row(static_cast<int>(oy));
    for (int ox = 0; ox < out_w; ++ox) {
      const double area = tap_sum(yt) * tap_sum(xtaps[static_cast<std::size_t>(ox)]);
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (const auto& t : yt)
          acc += t.weight * tmp[(static_cast<std::size_t>(t.index) * out_w + ox) * ch + c];
        dst[static_cast<std::size_t>(ox) * ch + c] = to_byte(acc / area);
      }
    }
  });
  return out;
}

Image downscale(const Image& img, double scale, Exec exec) {
  const auto [w, h] = scaled_size(img.width(), img.height(), scale);
  return downscale_to(img, w, h, exec);
}

Image upscale_nearest(const Image& img, int out_w, int out_h) {
  if (out_w < img.width() || out_h < img.height())
    throw ArgumentError("upscale_nearest cannot shrink");
  Image out(out_w, out_h, img.channels());
  const int ch = img.channels();
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(img.height() - 1,
                            static_cast<int>((y + 0.5) * img.height() / out_h));
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min(img.width() - 1,
                              static_cast<int>((x + 0.5) * img.width() / out_w));
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

Image apply_distortion(const Image& img, const DistortionSpec& spec, std::uint64_t frame_index,
                       Exec exec) {
  spec.validate();
  switch (spec.kind) {
    case DistortionKind::res: return downscale(img, spec.param, exec);
    case DistortionKind::wn: return add_gaussian_noise(img, spec.param, spec.seed + frame_index, exec);
    case DistortionKind::bv: return adjust_brightness(img, spec.param, exec);
    case DistortionKind::qp: break;
  }
  throw ArgumentError("qp distortion goes through the codec, not apply_distortion");
}

}  // namespace robench

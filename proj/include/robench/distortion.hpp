#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "robench/image.hpp"
#include "robench/parallel.hpp"

namespace robench {

/// The four degradation families: compression (QP), resolution reduction,
/// additive white noise and brightness variation.
enum class DistortionKind { qp, res, wn, bv };

inline constexpr DistortionKind kAllKinds[] = {DistortionKind::qp, DistortionKind::res,
                                               DistortionKind::wn, DistortionKind::bv};

std::string_view to_string(DistortionKind kind);
/// Throws ArgumentError for anything but "qp", "res", "wn", "bv".
DistortionKind parse_kind(std::string_view name);

/// One distorted version of a reference.
///   qp:  param is the integer QP in [0,65]
///   res: param is the scale fraction in (0,1]
///   wn:  param is the noise sigma on the normalized scale, (0,1]
///   bv:  param is a signed normalized offset in [-1,1] excluding 0
/// `seed` is only meaningful for wn; it is the base seed, frame i uses seed + i.
struct DistortionSpec {
  DistortionKind kind = DistortionKind::qp;
  int level = 1;
  double param = 0.0;
  std::uint64_t seed = 0;

  /// Throws ArgumentError when the invariants above do not hold.
  void validate() const;

  friend bool operator==(const DistortionSpec&, const DistortionSpec&) = default;
};

/// clip(x + N(0, sigma²), 0, 1) per sample on the normalized scale, quantized
/// back to 8 bits. The noise field is a pure function of (seed, sample index),
/// so the serial and parallel paths produce identical frames.
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed,
                         Exec exec = Exec::parallel);

/// clip(x + offset, 0, 1) per sample, quantized back to 8 bits.
Image adjust_brightness(const Image& img, double offset, Exec exec = Exec::parallel);

/// Output size for a scale factor: round-half-away of each dimension.
/// Throws ArgumentError when a dimension would be zero or scale is outside (0,1].
std::pair<int, int> scaled_size(int width, int height, double scale);

/// Box-filter (area-weighted) reduction to scaled_size(width, height, scale).
Image downscale(const Image& img, double scale, Exec exec = Exec::parallel);

/// Area-weighted resample to an explicit size no larger than the input.
Image downscale_to(const Image& img, int out_width, int out_height, Exec exec = Exec::parallel);

/// Pixel replication back to a larger size (used to compare reduced frames
/// with their reference).
Image upscale_nearest(const Image& img, int out_width, int out_height);

/// Applies one non-compression distortion to a frame. `frame_index` offsets the
/// noise seed. qp is handled by the codec module and rejected here.
Image apply_distortion(const Image& img, const DistortionSpec& spec, std::uint64_t frame_index,
                       Exec exec = Exec::parallel);

/// Deterministic standard normal pair source keyed by (seed, counter).
/// Exposed for tests.
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t counter);

}  // namespace robench

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "robench/image.hpp"

namespace robench {

/// Full-sequence quality figures for one distorted version.
struct QualityStats {
  double psnr_db = 0.0;  // +inf when bit-identical
  double mean_luma = 0.0;
  std::uint64_t original_bytes = 0;
  std::uint64_t encoded_bytes = 0;
  double compression_ratio = 0.0;  // original / encoded, 0 when encoded is 0
};

/// Sum of squared differences over all samples. Throws SizeError on shape mismatch.
double squared_error(const Image& a, const Image& b);

/// 10·log10(255² / mse), +inf for mse == 0.
double psnr_from_mse(double mse);

/// PSNR over all raw samples of both images; +inf when identical.
double psnr(const Image& a, const Image& b);

/// Average luma (BT.601 for RGB) over all pixels, on the 0..255 scale.
double mean_luma(const Image& img);

/// Quality of a distorted frame sequence against its reference. PSNR pools the
/// squared error of all frames before taking the log; mean luma is the average
/// of per-frame means of `dist`. `encoded_bytes` defaults to the raw size of
/// `dist`.
QualityStats sequence_quality(std::span<const Image> ref, std::span<const Image> dist,
                              std::optional<std::uint64_t> encoded_bytes = std::nullopt);

/// Raw sample bytes of a sequence.
std::uint64_t raw_bytes(std::span<const Image> frames);

/// "inf" for +infinity, shortest round-trip decimal otherwise.
std::string format_db(double db);

}  // namespace robench

#pragma once

#include <filesystem>
#include <string>
#include <cstddef>
#include <string_view>

#include "robench/image.hpp"

namespace robench {

/// Binary netpbm flavours: P5 (grey) and P6 (RGB), maxval 255.
enum class PnmFormat { pgm, ppm };

int channels_of(PnmFormat format);
std::string_view extension_of(PnmFormat format);  // ".pgm" / ".ppm"
PnmFormat format_for_channels(int channels);

/// "frame_00042.pgm": the on-disk name of frame `index` in a sequence directory.
std::string frame_name(std::size_t index, PnmFormat format);

/// Parses an in-memory P5/P6 file. Comments are accepted between header
/// fields; exactly one whitespace byte separates maxval from the payload.
Image decode_pnm(std::string_view bytes);
Image decode_pnm(std::string_view bytes, PnmFormat expected);

std::string encode_pnm(const Image& img, PnmFormat format);

/// Format is taken from the magic number.
Image load_frame(const std::filesystem::path& path);
/// Fails with FormatError when the file is not of the requested format.
Image load_frame(const std::filesystem::path& path, PnmFormat format);

/// Writes `img`; throws ArgumentError when the channel count does not match
/// the format and IoError when the path cannot be written.
void save_frame(const Image& img, const std::filesystem::path& path, PnmFormat format);

}  // namespace robench

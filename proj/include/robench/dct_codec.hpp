#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "robench/image.hpp"
#include "robench/parallel.hpp"

namespace robench {

/// Compression surrogate: 8×8 block DCT with uniform scalar quantization.
///
/// Per channel the frame is cut into 8×8 blocks (edge blocks padded by
/// replication, cropped after reconstruction), level-shifted by -128 and
/// transformed with the orthonormal 2-D DCT-II. Coefficients are quantized
/// with q = round(c / step), step = 2^((qp - 4) / 6), so every QP unit scales
/// the step by 2^(1/6) (about 12%). Reconstruction is q·step followed by the
/// inverse DCT and clipping.
///
/// The encoded size is the length of the quantized coefficient stream: for
/// each block, ue(number of non-zero coefficients) and then, for every
/// non-zero coefficient in zig-zag order, ue(zeros since the previous one)
/// followed by se(level), all Exp-Golomb coded.

inline constexpr int kMinQp = 0;
inline constexpr int kMaxQp = 65;
inline constexpr int kBlock = 8;

using Block = std::array<double, 64>;
using QuantBlock = std::array<int, 64>;

/// Quantizer step for a QP; throws ArgumentError outside [0,65].
double quant_step(int qp);

/// Zig-zag scan order: kZigzag[i] is the raster index of the i-th coefficient.
extern const std::array<int, 64> kZigzag;

void forward_dct(const Block& pixels, Block& coeffs);
void inverse_dct(const Block& coeffs, Block& pixels);

class BitWriter {
 public:
  void put_bits(std::uint64_t value, int count);
  void put_ue(std::uint64_t v);
  void put_se(std::int64_t v);
  std::uint64_t bit_count() const noexcept { return bits_; }
  /// Bytes so far, final byte zero-padded.
  std::vector<std::uint8_t> bytes() const;

 private:
  std::vector<std::uint8_t> buf_;
  std::uint64_t bits_ = 0;
};

/// Counts bits without storing them.
class BitCounter {
 public:
  void put_ue(std::uint64_t v) noexcept { bits_ += ue_length(v); }
  void put_se(std::int64_t v) noexcept;
  std::uint64_t bit_count() const noexcept { return bits_; }
  static int ue_length(std::uint64_t v) noexcept;

 private:
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint64_t get_bits(int count);
  std::uint64_t get_ue();
  std::int64_t get_se();

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

template <typename Writer>
void encode_block(const QuantBlock& q, Writer& w) {
  int nonzero = 0;
  for (int v : q) nonzero += v != 0;
  w.put_ue(static_cast<std::uint64_t>(nonzero));
  int run = 0;
  for (int i = 0; i < 64; ++i) {
    const int v = q[static_cast<std::size_t>(kZigzag[static_cast<std::size_t>(i)])];
    if (v == 0) {
      ++run;
      continue;
    }
    w.put_ue(static_cast<std::uint64_t>(run));
    w.put_se(v);
    run = 0;
  }
}

QuantBlock decode_block(BitReader& r);

/// Quantized coefficient blocks of a frame, channel-major then block raster order.
struct QuantizedFrame {
  int width = 0;
  int height = 0;
  int channels = 0;
  int qp = 0;
  std::vector<QuantBlock> blocks;
};

QuantizedFrame quantize_frame(const Image& img, int qp, Exec exec = Exec::parallel);
Image reconstruct_frame(const QuantizedFrame& frame, Exec exec = Exec::parallel);

std::vector<std::uint8_t> encode_coefficients(const QuantizedFrame& frame);
/// Inverse of encode_coefficients given the frame geometry.
std::vector<QuantBlock> decode_coefficients(std::span<const std::uint8_t> bytes,
                                            std::size_t block_count);

struct CompressedFrame {
  Image image;
  std::uint64_t encoded_bytes = 0;
};

/// Quantize, measure the coded size, reconstruct.
CompressedFrame compress_dct(const Image& img, int qp, Exec exec = Exec::parallel);

}  // namespace robench

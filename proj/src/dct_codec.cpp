#include "robench/dct_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

double quant_step(int qp) {
  if (qp < kMinQp || qp > kMaxQp)
    throw ArgumentError(fmt::format("qp must be in [{},{}], got {}", kMinQp, kMaxQp, qp));
  return std::exp2((qp - 4) / 6.0);
}

const std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

namespace {

// basis[k][n] = a(k) cos((2n+1) k pi / 16)
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    for (int k = 0; k < 8; ++k) {
      const double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n)
        b[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] =
            a * std::cos((2 * n + 1) * k * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

}  // namespace

void forward_dct(const Block& px, Block& out) {
  const auto& b = dct_basis();
  Block tmp{};
  // rows
  for (int y = 0; y < 8; ++y)
    for (int k = 0; k < 8; ++k) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += b[k][x] * px[y * 8 + x];
      tmp[y * 8 + k] = acc;
    }
  // columns
  for (int k = 0; k < 8; ++k)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b[k][y] * tmp[y * 8 + u];
      out[k * 8 + u] = acc;
    }
}

void inverse_dct(const Block& coeffs, Block& out) {
  const auto& b = dct_basis();
  Block tmp{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int k = 0; k < 8; ++k) acc += b[k][y] * coeffs[k * 8 + u];
      tmp[y * 8 + u] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b[u][x] * tmp[y * 8 + u];
      out[y * 8 + x] = acc;
    }
}

// ---------------------------------------------------------------------------
// Exp-Golomb bit I/O

void BitWriter::put_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    if (bits_ % 8 == 0) buf_.push_back(0);
    if ((value >> i) & 1U) buf_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
    ++bits_;
  }
}

void BitWriter::put_ue(std::uint64_t v) {
  const std::uint64_t code = v + 1;
  const int len = std::bit_width(code);
  put_bits(0, len - 1);
  put_bits(code, len);
}

namespace {
std::uint64_t se_to_ue(std::int64_t v) {
  return v > 0 ? static_cast<std::uint64_t>(2 * v - 1) : static_cast<std::uint64_t>(-2 * v);
}
}  // namespace

void BitWriter::put_se(std::int64_t v) { put_ue(se_to_ue(v)); }

std::vector<std::uint8_t> BitWriter::bytes() const { return buf_; }

int BitCounter::ue_length(std::uint64_t v) noexcept {
  return 2 * std::bit_width(v + 1) - 1;
}

void BitCounter::put_se(std::int64_t v) noexcept { bits_ += ue_length(se_to_ue(v)); }

std::uint64_t BitReader::get_bits(int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t byte = pos_ / 8;
    if (byte >= bytes_.size()) throw FormatError("coefficient stream truncated");
    const unsigned bit = (bytes_[byte] >> (7 - pos_ % 8)) & 1U;
    v = (v << 1) | bit;
    ++pos_;
  }
  return v;
}

std::uint64_t BitReader::get_ue() {
  int zeros = 0;
  while (get_bits(1) == 0) {
    if (++zeros > 63) throw FormatError("malformed Exp-Golomb code");
  }
  const std::uint64_t rest = zeros ? get_bits(zeros) : 0;
  return ((std::uint64_t{1} << zeros) | rest) - 1;
}

std::int64_t BitReader::get_se() {
  const std::uint64_t u = get_ue();
  return (u & 1U) ? static_cast<std::int64_t>((u + 1) / 2) : -static_cast<std::int64_t>(u / 2);
}

QuantBlock decode_block(BitReader& r) {
  QuantBlock q{};
  const std::uint64_t nonzero = r.get_ue();
  if (nonzero > 64) throw FormatError("block claims more than 64 coefficients");
  std::size_t pos = 0;
  for (std::uint64_t i = 0; i < nonzero; ++i) {
    pos += r.get_ue();
    if (pos >= 64) throw FormatError("zero run past end of block");
    q[static_cast<std::size_t>(kZigzag[pos])] = static_cast<int>(r.get_se());
    ++pos;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Frames

namespace {

int blocks_along(int n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

QuantizedFrame quantize_frame(const Image& img, int qp, Exec exec) {
  const double step = quant_step(qp);
  QuantizedFrame f{img.width(), img.height(), img.channels(), qp, {}};
  const int bx_n = blocks_along(img.width());
  const int by_n = blocks_along(img.height());
  const int ch = img.channels();
  f.blocks.resize(static_cast<std::size_t>(ch) * bx_n * by_n);

  // One task per (channel, block row).
  for_each_index(exec, static_cast<std::ptrdiff_t>(ch) * by_n, [&](std::ptrdiff_t task) {
    const int c = static_cast<int>(task / by_n);
    const int by = static_cast<int>(task % by_n);
    Block px{}, coeffs{};
    for (int bx = 0; bx < bx_n; ++bx) {
      for (int y = 0; y < 8; ++y) {
        const int sy = std::min(by * 8 + y, img.height() - 1);
        for (int x = 0; x < 8; ++x) {
          const int sx = std::min(bx * 8 + x, img.width() - 1);
          px[y * 8 + x] = static_cast<double>(img.at(sx, sy, c)) - 128.0;
        }
      }
      forward_dct(px, coeffs);
      auto& q = f.blocks[(static_cast<std::size_t>(c) * by_n + by) * bx_n + bx];
      for (int i = 0; i < 64; ++i)
        q[i] = static_cast<int>(round_half_away(coeffs[i] / step));
    }
  });
  return f;
}

Image reconstruct_frame(const QuantizedFrame& f, Exec exec) {
  const double step = quant_step(f.qp);
  Image out(f.width, f.height, f.channels);
  const int bx_n = blocks_along(f.width);
  const int by_n = blocks_along(f.height);
  for_each_index(exec, static_cast<std::ptrdiff_t>(f.channels) * by_n, [&](std::ptrdiff_t task) {
    const int c = static_cast<int>(task / by_n);
    const int by = static_cast<int>(task % by_n);
    Block coeffs{}, px{};
    for (int bx = 0; bx < bx_n; ++bx) {
      const auto& q = f.blocks[(static_cast<std::size_t>(c) * by_n + by) * bx_n + bx];
      for (int i = 0; i < 64; ++i) coeffs[i] = q[i] * step;
      inverse_dct(coeffs, px);
      for (int y = 0; y < 8; ++y) {
        const int oy = by * 8 + y;
        if (oy >= f.height) break;
        for (int x = 0; x < 8; ++x) {
          const int ox = bx * 8 + x;
          if (ox >= f.width) break;
          out.at(ox, oy, c) = to_byte(px[y * 8 + x] + 128.0);
        }
      }
    }
  });
  return out;
}

std::vector<std::uint8_t> encode_coefficients(const QuantizedFrame& frame) {
  BitWriter w;
  for (const auto& b : frame.blocks) encode_block(b, w);
  return w.bytes();
}

std::vector<QuantBlock> decode_coefficients(std::span<const std::uint8_t> bytes,
                                            std::size_t block_count) {
  BitReader r(bytes);
  std::vector<QuantBlock> blocks;
  blocks.reserve(block_count);
  for (std::size_t i = 0; i < block_count; ++i) blocks.push_back(decode_block(r));
  return blocks;
}

CompressedFrame compress_dct(const Image& img, int qp, Exec exec) {
  QuantizedFrame q = quantize_frame(img, qp, exec);

  // Bit counts are summed per block so the total does not depend on task order.
  std::vector<std::uint64_t> bits(q.blocks.size());
  for_each_index(exec, static_cast<std::ptrdiff_t>(q.blocks.size()), [&](std::ptrdiff_t i) {
    BitCounter counter;
    encode_block(q.blocks[static_cast<std::size_t>(i)], counter);
    bits[static_cast<std::size_t>(i)] = counter.bit_count();
  });
  std::uint64_t total = 0;
  for (auto b : bits) total += b;

  return {reconstruct_frame(q, exec), (total + 7) / 8};
}

}  // namespace robench

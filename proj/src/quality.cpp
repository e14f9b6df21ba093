#include "robench/quality.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

double squared_error(const Image& a, const Image& b) {
  if (!a.same_shape(b))
    throw SizeError(fmt::format("image shape mismatch: {}x{}x{} vs {}x{}x{}", a.width(),
                                a.height(), a.channels(), b.width(), b.height(), b.channels()));
  const auto sa = a.samples();
  const auto sb = b.samples();
  // Integer accumulation keeps the sum exact and order independent.
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const int d = static_cast<int>(sa[i]) - static_cast<int>(sb[i]);
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum);
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double psnr(const Image& a, const Image& b) {
  return psnr_from_mse(squared_error(a, b) / static_cast<double>(a.sample_count()));
}

double mean_luma(const Image& img) {
  const auto s = img.samples();
  if (img.channels() == 1) {
    std::uint64_t sum = 0;
    for (auto v : s) sum += v;
    return static_cast<double>(sum) / static_cast<double>(s.size());
  }
  std::uint64_t r = 0, g = 0, b = 0;
  for (std::size_t i = 0; i < s.size(); i += 3) {
    r += s[i];
    g += s[i + 1];
    b += s[i + 2];
  }
  const double n = static_cast<double>(s.size() / 3);
  return (kLumaR * static_cast<double>(r) + kLumaG * static_cast<double>(g) +
          kLumaB * static_cast<double>(b)) /
         n;
}

std::uint64_t raw_bytes(std::span<const Image> frames) {
  std::uint64_t total = 0;
  for (const auto& f : frames) total += f.sample_count();
  return total;
}

QualityStats sequence_quality(std::span<const Image> ref, std::span<const Image> dist,
                              std::optional<std::uint64_t> encoded_bytes) {
  if (ref.size() != dist.size())
    throw SizeError(fmt::format("frame count mismatch: {} vs {}", ref.size(), dist.size()));
  if (ref.empty()) throw SizeError("empty frame sequence");

  double sse = 0.0;
  double samples = 0.0;
  double luma = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    sse += squared_error(ref[i], dist[i]);
    samples += static_cast<double>(ref[i].sample_count());
    luma += mean_luma(dist[i]);
  }

  QualityStats q;
  q.psnr_db = psnr_from_mse(sse / samples);
  q.mean_luma = luma / static_cast<double>(dist.size());
  q.original_bytes = raw_bytes(ref);
  q.encoded_bytes = encoded_bytes.value_or(raw_bytes(dist));
  q.compression_ratio = q.encoded_bytes > 0 ? static_cast<double>(q.original_bytes) /
                                                  static_cast<double>(q.encoded_bytes)
                                            : 0.0;
  return q;
}

std::string format_db(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  return fmt::format("{}", db);
}

}  // namespace robench

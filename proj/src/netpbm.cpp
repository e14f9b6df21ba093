#include "robench/netpbm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

int channels_of(PnmFormat format) { return format == PnmFormat::pgm ? 1 : 3; }

std::string_view extension_of(PnmFormat format) {
  return format == PnmFormat::pgm ? ".pgm" : ".ppm";
}

std::string frame_name(std::size_t index, PnmFormat format) {
  return fmt::format("frame_{:05d}{}", index, extension_of(format));
}

PnmFormat format_for_channels(int channels) {
  if (channels == 1) return PnmFormat::pgm;
  if (channels == 3) return PnmFormat::ppm;
  throw ArgumentError("no netpbm format for " + std::to_string(channels) + " channels");
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  int read_int(const char* field) {
    skip_space_and_comments();
    int value = 0;
    const char* first = bytes_.data() + pos_;
    const char* last = bytes_.data() + bytes_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first)
      throw FormatError(std::string("netpbm header: cannot read ") + field);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw FormatError("netpbm header: missing whitespace before payload");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw FormatError("netpbm: bad magic (expected P5 or P6)");
  const int channels = bytes[1] == '5' ? 1 : 3;

  HeaderReader reader(bytes.substr(2));
  const int width = reader.read_int("width");
  const int height = reader.read_int("height");
  const int maxval = reader.read_int("maxval");
  if (width < 1 || height < 1) throw FormatError("netpbm header: non-positive dimensions");
  if (maxval != 255) throw FormatError("netpbm header: maxval must be 255");
  reader.expect_single_whitespace();

  const std::size_t payload_begin = 2 + reader.pos();
  const std::size_t expected = static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(channels);
  const std::size_t available = bytes.size() - payload_begin;
  if (available < expected)
    throw SizeError("netpbm payload truncated: " + std::to_string(available) + " of " +
                    std::to_string(expected) + " bytes");

  std::vector<std::uint8_t> samples(expected);
  const auto* src = reinterpret_cast<const std::uint8_t*>(bytes.data() + payload_begin);
  std::copy(src, src + expected, samples.begin());
  return Image(width, height, channels, std::move(samples));
}

Image decode_pnm(std::string_view bytes, PnmFormat expected) {
  Image img = decode_pnm(bytes);
  if (img.channels() != channels_of(expected))
    throw FormatError(std::string("netpbm: expected ") +
                      (expected == PnmFormat::pgm ? "P5" : "P6") + " file");
  return img;
}

std::string encode_pnm(const Image& img, PnmFormat format) {
  if (img.channels() != channels_of(format))
    throw ArgumentError("cannot write a " + std::to_string(img.channels()) + "-channel image as " +
                        (format == PnmFormat::pgm ? "pgm" : "ppm"));
  std::string out = (format == PnmFormat::pgm ? "P5\n" : "P6\n") + std::to_string(img.width()) +
                    " " + std::to_string(img.height()) + "\n255\n";
  const auto s = img.samples();
  out.append(reinterpret_cast<const char*>(s.data()), s.size());
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Image load_frame(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

Image load_frame(const std::filesystem::path& path, PnmFormat format) {
  return decode_pnm(read_file(path), format);
}

void save_frame(const Image& img, const std::filesystem::path& path, PnmFormat format) {
  const std::string bytes = encode_pnm(img, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace robench

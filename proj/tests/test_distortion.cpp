#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "robench/dct_codec.hpp"
#include "robench/distortion.hpp"
#include "robench/error.hpp"
#include "robench/ladder.hpp"
#include "robench/quality.hpp"

using namespace robench;

namespace {

// Textbook O(N^4) orthonormal DCT-II.
Block naive_dct(const Block& px) {
  Block out{};
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          s += px[static_cast<std::size_t>(y * 8 + x)] *
               std::cos((2 * x + 1) * u * std::numbers::pi / 16) *
               std::cos((2 * y + 1) * v * std::numbers::pi / 16);
      const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
      const double cv = v == 0 ? std::sqrt(0.125) : 0.5;
      out[static_cast<std::size_t>(v * 8 + u)] = cu * cv * s;
    }
  return out;
}

Image constant(int w, int h, std::uint8_t v) {
  Image img(w, h, 1);
  for (auto& s : img.samples()) s = v;
  return img;
}

}  // namespace

TEST_CASE("forward transform matches the textbook sum") {
  gen::Rng r(1);
  for (int t = 0; t < 50; ++t) {
    Block px{};
    for (auto& v : px) v = r.uniform(-128.0, 127.0);
    Block c{};
    forward_dct(px, c);
    const auto ref = naive_dct(px);
    for (std::size_t i = 0; i < 64; ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    Block back{};
    inverse_dct(c, back);
    for (std::size_t i = 0; i < 64; ++i) CHECK(back[i] == doctest::Approx(px[i]).epsilon(1e-9));
  }
}

TEST_CASE("quantizer step law") {
  CHECK(quant_step(4) == 1.0);
  CHECK(quant_step(10) == 2.0);
  for (int qp = 0; qp < 65; ++qp)
    CHECK(quant_step(qp + 1) / quant_step(qp) == doctest::Approx(std::exp2(1.0 / 6.0)).epsilon(1e-14));
  CHECK_THROWS_AS(quant_step(-1), ArgumentError);
  CHECK_THROWS_AS(quant_step(66), ArgumentError);
}

TEST_CASE("zig-zag is a permutation starting at DC") {
  std::array<bool, 64> seen{};
  for (int i : kZigzag) seen[static_cast<std::size_t>(i)] = true;
  for (bool s : seen) CHECK(s);
  CHECK(kZigzag[0] == 0);
  CHECK(kZigzag[1] == 1);
  CHECK(kZigzag[2] == 8);
  CHECK(kZigzag[63] == 63);
}

TEST_CASE("exp-golomb round trip") {
  gen::Rng r(2);
  BitWriter w;
  BitCounter counter;
  std::vector<std::uint64_t> us;
  std::vector<std::int64_t> ss;
  for (int i = 0; i < 500; ++i) {
    us.push_back(r.next() % (i < 250 ? 16 : 100000));
    ss.push_back(static_cast<std::int64_t>(r.next() % 2001) - 1000);
    w.put_ue(us.back());
    w.put_se(ss.back());
    counter.put_ue(us.back());
    counter.put_se(ss.back());
  }
  CHECK(counter.bit_count() == w.bit_count());
  const auto bytes = w.bytes();
  BitReader rd(bytes);
  for (std::size_t i = 0; i < us.size(); ++i) {
    CHECK(rd.get_ue() == us[i]);
    CHECK(rd.get_se() == ss[i]);
  }
  CHECK(BitCounter::ue_length(0) == 1);
  CHECK(BitCounter::ue_length(1) == 3);
  CHECK(BitCounter::ue_length(6) == 5);
}

TEST_CASE("coefficient stream decodes to the quantized blocks") {
  gen::Rng r(3);
  for (int qp : {4, 20, 40}) {
    const auto img = gen::image(r, 21, 13);
    const auto q = quantize_frame(img, qp);
    const auto bytes = encode_coefficients(q);
    CHECK(decode_coefficients(bytes, q.blocks.size()) == q.blocks);
  }
}

TEST_CASE("small steps are near-lossless") {
  gen::Rng r(4);
  const auto img = gen::image(r, 16, 16);
  const auto c = compress_dct(img, 0);  // step 2^(-2/3)
  for (std::size_t i = 0; i < img.sample_count(); ++i)
    CHECK(std::abs(int(c.image.samples()[i]) - int(img.samples()[i])) <= 1);
}

TEST_CASE("coarser quantizer never improves quality or size") {
  gen::Rng r(5);
  for (int t = 0; t < 10; ++t) {
    const auto img = gen::smooth_image(r, 40, 32);
    const auto fine = compress_dct(img, 10), coarse = compress_dct(img, 40);
    CHECK(psnr(img, fine.image) >= psnr(img, coarse.image));
    CHECK(compress_dct(img, 65).encoded_bytes <= fine.encoded_bytes);
  }
}

TEST_CASE("edge blocks keep the frame size") {
  gen::Rng r(6);
  const auto img = gen::image(r, 13, 9, 3);
  const auto c = compress_dct(img, 20);
  CHECK(c.image.same_shape(img));
}

TEST_CASE("codec serial and parallel agree") {
  gen::Rng r(7);
  const auto img = gen::image(r, 64, 40);
  const auto a = compress_dct(img, 30, Exec::serial);
  const auto b = compress_dct(img, 30, Exec::parallel);
  CHECK(a.image == b.image);
  CHECK(a.encoded_bytes == b.encoded_bytes);
}

TEST_CASE("noise: vanishing sigma, determinism, seeds") {
  gen::Rng r(9);
  const auto img = gen::image(r, 32, 32);
  CHECK(add_gaussian_noise(img, 1e-9, 5) == img);
  CHECK(add_gaussian_noise(img, 0.1, 5) == add_gaussian_noise(img, 0.1, 5));
  CHECK(add_gaussian_noise(img, 0.1, 5) != add_gaussian_noise(img, 0.1, 6));
  CHECK(add_gaussian_noise(img, 0.1, 5, Exec::serial) ==
        add_gaussian_noise(img, 0.1, 5, Exec::parallel));
}

TEST_CASE("noise psnr follows -20 log10 sigma") {
  const auto grey = constant(256, 256, 128);
  for (double sigma : {0.005, 0.01, 0.02, 0.05}) {
    const double p = psnr(grey, add_gaussian_noise(grey, sigma, 20180101));
    CHECK(std::abs(p - (-20.0 * std::log10(sigma))) <= 0.5);
  }
}

TEST_CASE("normal pairs have unit moments") {
  double s1 = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = normal_pair(99, static_cast<std::uint64_t>(i));
    s1 += a + b;
    s2 += a * a + b * b;
  }
  CHECK(std::abs(s1 / (2 * n)) < 0.03);
  CHECK(std::abs(s2 / (2 * n) - 1.0) < 0.03);
}

TEST_CASE("brightness") {
  gen::Rng r(10);
  const auto img = gen::image(r, 8, 8);
  CHECK(adjust_brightness(constant(4, 4, 128), 0.1).at(0, 0) == 154);  // 128 + 25.5 rounds up
  CHECK(adjust_brightness(constant(4, 4, 127), 0.1).at(0, 0) == 153);
  CHECK(adjust_brightness(constant(2, 2, 230), 0.3).at(1, 1) == 255);
  CHECK(adjust_brightness(constant(2, 2, 20), -0.3).at(1, 1) == 0);
  CHECK(adjust_brightness(img, 0.0) == img);
  // Raising the offset never lowers a sample.
  for (int k = -10; k < 10; ++k) {
    const auto lo = adjust_brightness(img, k / 10.0), hi = adjust_brightness(img, (k + 1) / 10.0);
    for (std::size_t i = 0; i < img.sample_count(); ++i) CHECK(lo.samples()[i] <= hi.samples()[i]);
  }
}

TEST_CASE("downscale") {
  const Image img(2, 2, 1, {0, 64, 128, 192});
  CHECK(downscale(img, 0.5).at(0, 0) == 96);
  gen::Rng r(11);
  const auto a = gen::image(r, 20, 10);
  CHECK(downscale(a, 1.0) == a);
  CHECK(scaled_size(768, 576, 1.0 / 32) == std::pair{24, 18});
  CHECK(scaled_size(5, 5, 0.5) == std::pair{3, 3});  // 2.5 rounds away from zero
  CHECK_THROWS_AS(scaled_size(10, 10, 0.01), ArgumentError);
  CHECK_THROWS_AS(scaled_size(10, 10, 1.5), ArgumentError);
  // Area averaging preserves the mean of a constant image.
  CHECK(downscale(constant(33, 17, 77), 0.37) == constant(scaled_size(33, 17, 0.37).first,
                                                          scaled_size(33, 17, 0.37).second, 77));
  CHECK(downscale(a, 0.3, Exec::serial) == downscale(a, 0.3, Exec::parallel));
}

TEST_CASE("distortion specs are validated") {
  CHECK_THROWS_AS((DistortionSpec{DistortionKind::qp, 1, 70.0, 0}.validate()), ArgumentError);
  CHECK_THROWS_AS((DistortionSpec{DistortionKind::qp, 1, 10.5, 0}.validate()), ArgumentError);
  CHECK_THROWS_AS((DistortionSpec{DistortionKind::res, 1, 0.0, 0}.validate()), ArgumentError);
  CHECK_THROWS_AS((DistortionSpec{DistortionKind::wn, 1, 1.5, 0}.validate()), ArgumentError);
  CHECK_THROWS_AS((DistortionSpec{DistortionKind::bv, 1, 0.0, 0}.validate()), ArgumentError);
  CHECK_THROWS_AS(parse_kind("blur"), ArgumentError);
  for (auto k : kAllKinds) CHECK(parse_kind(to_string(k)) == k);
}

TEST_CASE("default ladders") {
  const auto c = LadderConfig::defaults();
  CHECK(c.size(DistortionKind::qp) == 11);
  CHECK(c.size(DistortionKind::res) == 11);
  CHECK(c.size(DistortionKind::wn) == 20);
  CHECK(c.size(DistortionKind::bv) == 10);
  CHECK(c.total() == 52);
  CHECK(c.qp_levels.front() == 10);
  CHECK(c.qp_levels.back() == 65);
  CHECK(c.res_scales.back() == 1.0 / 32);
  CHECK(c.wn_sigmas.front() == 0.005);
  CHECK(c.wn_sigmas.back() == 0.5);
  int darker = 0;
  for (double o : c.bv_offsets) darker += o < 0.0;
  CHECK(darker == 4);
  const auto specs = ladder_specs(DistortionKind::wn, c);
  REQUIRE(specs.size() == 20);
  CHECK(specs[3].level == 4);
  CHECK(specs[3].seed == c.seed);
}

TEST_CASE("ladder config json") {
  auto c = LadderConfig::defaults();
  c.qp_levels = {12, 30};
  c.seed = 5;
  const auto back = ladder_config_from_json(ladder_config_to_json(c));
  CHECK(back.qp_levels == c.qp_levels);
  CHECK(back.wn_sigmas == c.wn_sigmas);
  CHECK(back.seed == 5);
  CHECK_THROWS_AS(ladder_config_from_json(nlohmann::json{{"qp_levels", {30, 12}}}), ConfigError);
  CHECK_THROWS_AS(ladder_config_from_json(nlohmann::json{{"bv_offsets", {0.0}}}), ConfigError);
  CHECK_THROWS_AS(ladder_config_from_json(nlohmann::json{{"wn_sigmas", "x"}}), ConfigError);
}

TEST_CASE("in-memory ladder statistics") {
  gen::Rng r(12);
  std::vector<Image> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(gen::smooth_image(r, 48, 32));
  const auto cfg = LadderConfig::defaults();

  double prev_psnr = std::numeric_limits<double>::infinity();
  std::uint64_t prev_bytes = std::numeric_limits<std::uint64_t>::max();
  for (const auto& s : ladder_specs(DistortionKind::qp, cfg)) {
    const auto row = ladder_stat_row(frames, distort_sequence(frames, s));
    CHECK(row.stats.psnr_db <= prev_psnr);
    CHECK(row.stats.encoded_bytes <= prev_bytes);
    prev_psnr = row.stats.psnr_db;
    prev_bytes = row.stats.encoded_bytes;
  }
  double prev_luma = -1.0;
  std::vector<double> offsets = cfg.bv_offsets;
  std::sort(offsets.begin(), offsets.end());
  for (double o : offsets) {
    const auto row = ladder_stat_row(frames, distort_sequence(frames, {DistortionKind::bv, 1, o, 0}));
    CHECK(row.stats.mean_luma > prev_luma);
    prev_luma = row.stats.mean_luma;
  }
  const auto ref = reference_stat_row(frames);
  CHECK(std::isinf(ref.stats.psnr_db));
  CHECK(ref.stats.compression_ratio == 1.0);
  CHECK(ref.level == 0);
}

TEST_CASE("stats csv round trip") {
  gen::Rng r(13);
  std::vector<Image> frames{gen::smooth_image(r, 24, 16)};
  std::vector<LadderStatRow> rows{reference_stat_row(frames)};
  for (const auto& s : ladder_specs(DistortionKind::res, LadderConfig::defaults()))
    rows.push_back(ladder_stat_row(frames, distort_sequence(frames, s)));
  const auto back = parse_stats_csv(stats_csv(rows));
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].kind == rows[i].kind);
    CHECK(back[i].param == rows[i].param);
    CHECK(back[i].stats.encoded_bytes == rows[i].stats.encoded_bytes);
    CHECK((back[i].stats.psnr_db == rows[i].stats.psnr_db));
  }
}

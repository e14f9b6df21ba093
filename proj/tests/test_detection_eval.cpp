#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gen.hpp"
#include "oracle.hpp"
#include "robench/detection_eval.hpp"
#include "robench/error.hpp"

using namespace robench;
using oracle::naive_iou;
using oracle::naive_match;

namespace {

struct Instance {
  std::vector<Detection> dts;
  std::vector<GroundTruthFrame> gts;
};

Instance random_instance(gen::Rng& r, int frames, int max_per_frame) {
  Instance in;
  for (int f = 0; f < frames; ++f) {
    GroundTruthFrame g{f, {}};
    const int ng = r.integer(0, max_per_frame);
    for (int i = 0; i < ng; ++i) g.boxes.push_back(gen::box(r));
    const int nd = r.integer(0, max_per_frame);
    for (int i = 0; i < nd; ++i) {
      const bool near = !g.boxes.empty() && r.uniform() < 0.7;
      const auto b = near ? gen::jitter(r, g.boxes[static_cast<std::size_t>(
                                                r.integer(0, ng - 1))])
                          : gen::box(r);
      in.dts.push_back({f, b, gen::score(r)});
    }
    in.gts.push_back(std::move(g));
  }
  return in;
}

}  // namespace

TEST_CASE("iou of simple boxes") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {10, 0, 10, 10}) == 0.0);  // touching edges
  CHECK(iou(a, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));
  CHECK(iou(a, {2, 2, 5, 5}) == doctest::Approx(25.0 / 100.0));
}

TEST_CASE("iou is symmetric and bounded") {
  gen::Rng r(11);
  for (int i = 0; i < 500; ++i) {
    const auto a = gen::box(r), b = gen::box(r);
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, b) >= 0.0);
    CHECK(iou(a, b) <= 1.0);
    CHECK(iou(a, b) == doctest::Approx(naive_iou(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("overlap of exactly one half does not match") {
  // 10x10 against 10x5 inside it: IoU = 0.5.
  const std::vector<Detection> d{{0, {0, 0, 10, 10}, 1.0}};
  const std::vector<BoundingBox> g{{0, 0, 10, 5}};
  const auto m = match_frame(d, g);
  CHECK(m.tp == 0);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
}

TEST_CASE("higher score claims the shared ground truth") {
  const std::vector<BoundingBox> g{{0, 0, 10, 20}};
  const std::vector<Detection> d{{0, {1, 0, 10, 20}, 0.3}, {0, {0, 1, 10, 20}, 0.9}};
  const auto m = match_frame(d, g);
  CHECK(m.matched_gt == std::vector<int>{-1, 0});
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
}

TEST_CASE("greedy matching equals the naive trace") {
  gen::Rng r(20180101);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(r, 1, 6);
    const auto m = match_frame(in.dts, in.gts[0].boxes);
    const auto expect = naive_match(in.dts, in.gts[0].boxes);
    REQUIRE(m.matched_gt == expect);
    const int tp = static_cast<int>(std::count_if(expect.begin(), expect.end(),
                                                  [](int v) { return v >= 0; }));
    CHECK(m.tp == tp);
    CHECK(m.fp == static_cast<int>(in.dts.size()) - tp);
    CHECK(m.fn == static_cast<int>(in.gts[0].boxes.size()) - tp);
  }
}

TEST_CASE("matching is one-to-one") {
  gen::Rng r(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_instance(r, 1, 6);
    const auto m = match_frame(in.dts, in.gts[0].boxes);
    std::set<int> seen;
    for (std::size_t i = 0; i < m.matched_gt.size(); ++i) {
      const int g = m.matched_gt[i];
      if (g < 0) continue;
      CHECK(seen.insert(g).second);
      CHECK(iou(in.dts[i].box, in.gts[0].boxes[static_cast<std::size_t>(g)]) > 0.5);
    }
  }
}

TEST_CASE("hand-traced sweep") {
  const std::vector<GroundTruthFrame> g{{0, {{0, 0, 10, 20}, {50, 0, 10, 20}}}};
  const std::vector<Detection> d{{0, {0, 0, 10, 20}, 0.9}, {0, {25, 30, 10, 20}, 0.8}};
  const auto c = mr_fppi_curve(d, g);
  REQUIRE(c.points.size() == 3);
  CHECK(std::isinf(c.points[0].threshold));
  CHECK(c.points[0].fppi == 0.0);
  CHECK(c.points[0].miss_rate == 1.0);
  CHECK(c.points[1].threshold == 0.9);
  CHECK(c.points[1].fppi == 0.0);
  CHECK(c.points[1].miss_rate == 0.5);
  CHECK(c.points[2].threshold == 0.8);
  CHECK(c.points[2].fppi == 1.0);
  CHECK(c.points[2].miss_rate == 0.5);
}

TEST_CASE("curve equals per-threshold re-matching") {
  gen::Rng r(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = r.integer(1, 4);
    auto in = random_instance(r, frames, 5);
    in.gts[0].boxes.push_back(gen::box(r));  // at least one box
    const auto c = mr_fppi_curve(in.dts, in.gts);

    std::set<double, std::greater<>> thresholds;
    for (const auto& d : in.dts) thresholds.insert(d.score);
    REQUIRE(c.points.size() == thresholds.size() + 1);
    int total = 0;
    for (const auto& f : in.gts) total += static_cast<int>(f.boxes.size());

    std::size_t k = 1;
    for (double t : thresholds) {
      int tp = 0, fp = 0;
      for (const auto& f : in.gts) {
        std::vector<Detection> kept;
        for (const auto& d : in.dts)
          if (d.frame_id == f.frame_id && d.score >= t) kept.push_back(d);
        for (int v : naive_match(kept, f.boxes)) (v >= 0 ? tp : fp) += 1;
      }
      const auto& p = c.points[k++];
      CHECK(p.threshold == t);
      CHECK(p.tp == tp);
      CHECK(p.fp == fp);
      CHECK(p.fppi == doctest::Approx(static_cast<double>(fp) / frames).epsilon(1e-15));
      CHECK(p.miss_rate == doctest::Approx(static_cast<double>(total - tp) / total).epsilon(1e-15));
    }
  }
}

TEST_CASE("curve is monotone in fppi and miss rate") {
  gen::Rng r(91);
  for (int trial = 0; trial < 200; ++trial) {
    auto in = random_instance(r, 3, 6);
    in.gts[1].boxes.push_back(gen::box(r));
    const auto c = mr_fppi_curve(in.dts, in.gts);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      CHECK(c.points[i].fppi >= c.points[i - 1].fppi);
      CHECK(c.points[i].miss_rate <= c.points[i - 1].miss_rate);
      CHECK(c.points[i].threshold < c.points[i - 1].threshold);
    }
  }
}

TEST_CASE("reference points are 10^(-2+k/4)") {
  const auto f = fppi_reference_points();
  CHECK(f.front() == 0.01);
  CHECK(f.back() == 1.0);
  for (int k = 0; k < 9; ++k) CHECK(f[static_cast<std::size_t>(k)] == std::pow(10.0, -2.0 + k / 4.0));
}

TEST_CASE("constant curve averages to the constant") {
  MrFppiCurve c;
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.35, 0, 0, 0});
  c.points.push_back({0.5, 5.0, 0.1, 0, 0, 0});  // beyond the last reference point
  CHECK(log_avg_miss_rate(c) == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("step reading of a three-point curve") {
  MrFppiCurve c;
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0, 0, 0, 0});
  c.points.push_back({0.7, 0.05, 0.4, 0, 0, 0});
  c.points.push_back({0.2, 1.0, 0.2, 0, 0, 0});
  const auto s = sample_miss_rates(c);
  // 10^-1.25 = 0.056 is the first reference point at or above 0.05.
  const std::array<double, 9> expect{1, 1, 1, 0.4, 0.4, 0.4, 0.4, 0.4, 0.2};
  CHECK(s == expect);
  CHECK(log_avg_miss_rate(c) == doctest::Approx(5.2 / 9.0).epsilon(1e-15));
}

TEST_CASE("equal fppi reads the lowest miss rate") {
  MrFppiCurve c;
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0, 0, 0, 0});
  c.points.push_back({0.9, 0.0, 0.5, 0, 0, 0});
  c.points.push_back({0.8, 0.0, 0.25, 0, 0, 0});
  for (double v : sample_miss_rates(c)) CHECK(v == 0.25);
}

TEST_CASE("accuracy bounds") {
  CHECK(accuracy(0.25) == 0.75);
  CHECK_THROWS_AS(accuracy(1.5), ArgumentError);
  CHECK_THROWS_AS(accuracy(-0.1), ArgumentError);
}

TEST_CASE("perfect detector has accuracy one") {
  std::vector<GroundTruthFrame> g;
  std::vector<Detection> d;
  for (int f = 0; f < 10; ++f) {
    g.push_back({f, {{10.0 * f, 5, 20, 40}}});
    d.push_back({f, {10.0 * f, 5, 20, 40}, 1.0});
  }
  const auto r = evaluate(d, g);
  CHECK(r.mr == 0.0);
  CHECK(r.accuracy == 1.0);
  CHECK(evaluate({}, g).accuracy == 0.0);
}

TEST_CASE("zero ground truth is an error") {
  const std::vector<GroundTruthFrame> g{{0, {}}, {1, {}}};
  CHECK_THROWS_AS(mr_fppi_curve({}, g), ZeroGroundTruthError);
  CHECK_THROWS_AS(mr_fppi_curve({}, {}), ZeroGroundTruthError);
  CHECK_THROWS_AS(height_stats(g), ZeroGroundTruthError);
}

TEST_CASE("detection on an unlisted frame is a format error") {
  const std::vector<GroundTruthFrame> g{{0, {{0, 0, 5, 5}}}};
  const std::vector<Detection> d{{3, {0, 0, 5, 5}, 1.0}};
  CHECK_THROWS_AS(mr_fppi_curve(d, g), FormatError);
}

TEST_CASE("height statistics") {
  const std::vector<GroundTruthFrame> same{{0, {{0, 0, 5, 64}, {9, 9, 5, 64}}}, {1, {{1, 1, 5, 64}}}};
  CHECK(height_stats(same).h_vc == 0.0);
  const std::vector<GroundTruthFrame> g{{0, {{0, 0, 5, 10}, {0, 0, 5, 30}}}};
  const auto s = height_stats(g);
  CHECK(s.mu_h == 20.0);
  CHECK(s.sigma_h == 10.0);
  CHECK(s.h_vc == 0.5);
}

TEST_CASE("csv round trips") {
  gen::Rng r(3);
  const auto in = random_instance(r, 5, 4);
  const auto dts = parse_detections_csv(detections_csv(in.dts));
  REQUIRE(dts.size() == in.dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    CHECK(dts[i].frame_id == in.dts[i].frame_id);
    CHECK(dts[i].box == in.dts[i].box);
    CHECK(dts[i].score == in.dts[i].score);
  }
  const auto gts = parse_ground_truth_csv(ground_truth_csv(in.gts), 5);
  REQUIRE(gts.size() == 5);
  for (std::size_t f = 0; f < 5; ++f) CHECK(gts[f].boxes == in.gts[f].boxes);
}

TEST_CASE("csv errors") {
  CHECK_THROWS_AS(parse_ground_truth_csv("frame_id,x,y,w,h\n0,1,2,0,4\n"), FormatError);
  CHECK_THROWS_AS(parse_ground_truth_csv("frame_id,x,y,w,h\n0,1,2,abc,4\n"), FormatError);
  CHECK_THROWS_AS(parse_ground_truth_csv("frame_id,x,y,w,h\n4,1,2,3,4\n", 2), FormatError);
  CHECK_THROWS_AS(parse_detections_csv("frame_id,x,y,w,h\n0,1,2,3,4\n"), FormatError);
  CHECK_THROWS_AS(parse_detections_csv("frame_id,x,y,w,h,score\n0,1,2,3,4,inf\n"), FormatError);
  // Frames without boxes are still evaluated frames.
  const auto g = parse_ground_truth_csv("frame_id,x,y,w,h\n1,1,2,3,4\n", 4);
  CHECK(g.size() == 4);
  CHECK(g[0].boxes.empty());
  CHECK(g[1].boxes.size() == 1);
}

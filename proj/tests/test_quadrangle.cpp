#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gen.hpp"
#include "robench/error.hpp"
#include "robench/quadrangle.hpp"

using namespace robench;

namespace {

StabilityVector random_s(gen::Rng& r) { return {r.uniform(), r.uniform(), r.uniform(), r.uniform()}; }

const ParsedQuadrangle& find(const std::vector<ParsedQuadrangle>& qs, const std::string& id) {
  const auto it = std::find_if(qs.begin(), qs.end(),
                               [&](const ParsedQuadrangle& q) { return q.detector_id == id; });
  REQUIRE(it != qs.end());
  return *it;
}

}  // namespace

TEST_CASE("glyph geometry") {
  const StabilityVector s{0.9, 0.8, 0.7, 0.6};
  const auto q = quadrangle("d", 0.6, s, 2.0);
  CHECK(q.cx == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(q.vertices[0].y == 0.9);
  CHECK(q.vertices[1].y == 0.8);
  CHECK(q.vertices[2].y == 0.7);
  CHECK(q.vertices[3].y == 0.6);
  CHECK(q.vertices[0].x < q.cx);
  CHECK(q.vertices[1].x > q.cx);
  CHECK(q.vertices[2].x > q.cx);
  CHECK(q.vertices[3].x < q.cx);
  CHECK(quadrangle("d", 0.6, s, 0.0).cx == 0.0);
}

TEST_CASE("glyph arguments are validated") {
  CHECK_THROWS_AS(quadrangle("d", 1.2, {}), ArgumentError);
  CHECK_THROWS_AS(quadrangle("d", 0.5, {}, -1.0), ArgumentError);
  CHECK_THROWS_AS(quadrangle("d", 0.5, {}, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(quadrangle("d", 0.5, StabilityVector{1.0, 1.1, 1.0, 1.0}), ArgumentError);
}

TEST_CASE("charts parse back to their geometry") {
  gen::Rng r(31);
  for (int t = 0; t < 50; ++t) {
    const double lambda = r.uniform(0.0, 8.0);
    std::vector<QuadrangleSpec> quads;
    const int n = r.integer(1, 5);
    for (int i = 0; i < n; ++i)
      quads.push_back(quadrangle("det<" + std::to_string(i) + ">&", r.uniform(), random_s(r), lambda));
    ChartConfig cfg;
    cfg.lambda = lambda;
    const auto parsed = parse_chart(render_chart(quads, cfg));
    CHECK(std::count_if(parsed.begin(), parsed.end(), [](auto& p) { return p.ideal; }) == 1);
    for (const auto& q : quads) {
      const auto& p = find(parsed, q.detector_id);
      CHECK(std::abs(p.cx - q.cx) < 1e-6);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(p.vertices[k].x - q.vertices[k].x) < 1e-6);
        CHECK(std::abs(p.vertices[k].y - q.vertices[k].y) < 1e-6);
      }
    }
  }
}

TEST_CASE("zero lambda collapses all centres") {
  std::vector<QuadrangleSpec> quads{quadrangle("a", 0.3, {}, 0.0), quadrangle("b", 0.9, {}, 0.0)};
  ChartConfig cfg;
  cfg.lambda = 0.0;
  for (const auto& p : parse_chart(render_chart(quads, cfg))) CHECK(std::abs(p.cx) < 1e-6);
}

TEST_CASE("charts are deterministic and written verbatim") {
  const std::vector<QuadrangleSpec> quads{quadrangle("a", 0.7, {0.9, 0.2, 0.5, 0.8})};
  const ChartConfig cfg;
  const auto svg = render_chart(quads, cfg);
  CHECK(svg == render_chart(quads, cfg));
  CHECK(svg.find("viewBox=\"0 0 1000 600\"") != std::string::npos);
  const auto dir = std::filesystem::temp_directory_path() / "robench_tests";
  std::filesystem::create_directories(dir);
  write_chart(quads, cfg, dir / "chart.svg");
  std::ifstream in(dir / "chart.svg");
  CHECK(std::string((std::istreambuf_iterator<char>(in)), {}) == svg);
  CHECK_THROWS_AS(write_chart(quads, cfg, "/nonexistent/dir/chart.svg"), IoError);
  CHECK_THROWS_AS(parse_chart("<html/>"), FormatError);
}

TEST_CASE("rankings ignore lambda and note ties") {
  const std::vector<std::pair<std::string, StabilityVector>> rs{
      {"b", {0.5, 0.9, 0.1, 0.3}}, {"a", {0.5, 0.2, 0.8, 0.4}}, {"c", {0.7, 0.2, 0.3, 0.2}}};
  const auto t = rank_by_stability(rs);
  const auto& qp = t.per_kind[0];
  CHECK(qp[0].detector_id == "c");
  CHECK(qp[1].detector_id == "a");  // tie with b broken by id
  CHECK(qp[2].detector_id == "b");
  CHECK(qp[2].rank == 3);
  CHECK(t.tie_broken == std::vector<DistortionKind>{DistortionKind::qp, DistortionKind::res});
  CHECK(t.per_kind[2][0].detector_id == "a");
  const auto csv = ranking_csv(t);
  CHECK(csv.rfind("kind,rank,detector_id,s_value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK(csv.find("qp,1,c,0.7\n") != std::string::npos);
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#ifndef ROBENCH_CLI
#error "ROBENCH_CLI must name the built command-line binary"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "robench_tests" / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    std::ofstream(d / "scene.json") << R"({"width": 160, "height": 120, "frames": 4, "actor_count": 2})";
    std::ofstream(d / "ladder.json")
        << R"({"qp_levels": [20, 45], "res_scales": [0.5], "wn_sigmas": [0.05], "bv_offsets": [-0.2, 0.2]})";
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(ROBENCH_CLI) + " " + args + " >" +
                          (root() / "last.out").string() + " 2>" + (root() / "last.err").string();
  const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

std::string p(const std::string& name) { return (root() / name).string(); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("stepwise workflow") {
  REQUIRE(run("synth --config " + p("scene.json") + " --out " + p("ref") + " --id scene") == 0);
  CHECK(fs::exists(root() / "ref" / "manifest.json"));
  CHECK(fs::exists(root() / "ref" / "gt.csv"));

  REQUIRE(run("distort --ref " + p("ref/manifest.json") + " --out " + p("lad") + " --kinds qp,bv --config " +
              p("ladder.json")) == 0);
  CHECK(fs::exists(root() / "lad" / "scene_qp_02" / "manifest.json"));
  CHECK(fs::exists(root() / "lad" / "scene_bv_02" / "manifest.json"));
  CHECK(!fs::exists(root() / "lad" / "scene_wn_01"));

  REQUIRE(run("train --ref " + p("ref/manifest.json") + " --gt " + p("ref/gt.csv") + " --out " + p("model.json") +
              " --exemplars 4") == 0);
  REQUIRE(run("--jobs 1 detect --manifest " + p("ref/manifest.json") + " --model " + p("model.json") + " --out " +
              p("dets.csv")) == 0);
  REQUIRE(run("eval --detections " + p("dets.csv") + " --gt " + p("ref/gt.csv") + " --manifest " +
              p("ref/manifest.json") + " --out " + p("eval.json") + " --curve-out " + p("curve.csv")) == 0);
  const auto j = nlohmann::json::parse(slurp(root() / "eval.json"));
  CHECK(j.contains("sequence_id"));
  CHECK(slurp(root() / "curve.csv").find("fppi") != std::string::npos);
}

TEST_CASE("end-to-end run and report") {
  const std::string common = " --scene " + p("scene.json") + " --ladder " + p("ladder.json") + " --exemplars 4";
  REQUIRE(run("run --out " + p("run_a") + common) == 0);
  REQUIRE(run("run --out " + p("run_b") + common + " --detector-id other") == 0);
  for (const char* f : {"report.json", "quadrangle.svg", "model.json", "ladders/stats.csv"})
    CHECK(fs::exists(root() / "run_a" / f));

  REQUIRE(run("stability --run-dir " + p("run_a") + " --out " + p("stab.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(root() / "stab.json")).contains("stability"));

  REQUIRE(run("report --reports " + p("run_a/report.json") + " " + p("run_b/report.json") + " --out-dir " +
              p("cmp")) == 0);
  CHECK(fs::exists(root() / "cmp" / "rankings.csv"));
  CHECK(fs::exists(root() / "cmp" / "chart.svg"));
  CHECK(run("report --reports " + p("run_a/report.json") + " " + p("run_a/report.json") + " --out-dir " +
            p("cmp2")) == 2);
}

TEST_CASE("exit codes") {
  CHECK(run("") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("frobnicate") == 2);
  CHECK(run("distort --ref " + p("nope.json") + " --out " + p("x")) == 2);
  CHECK(slurp(root() / "last.err").rfind("error: ", 0) == 0);
  std::ofstream(root() / "broken.json") << "{\"width\": ";
  CHECK(run("synth --config " + p("broken.json") + " --out " + p("y")) == 2);
  CHECK(run("run --out " + p("bad") + " --omega 1.5") == 2);
  std::ofstream(root() / "empty_gt.csv") << "frame_id,x,y,w,h\n";
  std::ofstream(root() / "no_dets.csv") << "frame_id,x,y,w,h,score\n";
  CHECK(run("eval --detections " + p("no_dets.csv") + " --gt " + p("empty_gt.csv") + " --frames 2") == 3);
  std::ofstream(root() / "bad_ladder.json") << R"({"bv_offsets": [-40]})";
  CHECK(run("run --out " + p("bad") + " --ladder " + p("bad_ladder.json")) == 2);
  CHECK(run("run --out " + p("bad") + " --kinds qp,xyz") == 2);
  CHECK(run("train --ref r --gt g --out m --templates median") == 2);
  std::ofstream(root() / "broken.csv") << "frame_id,x,y,w,h\n0,1,2\n";
  CHECK(run("eval --detections " + p("broken.csv") + " --gt " + p("broken.csv") + " --frames 1") == 3);
}

// Serial reference against the OpenMP path for the heavy kernels.

#include <benchmark/benchmark.h>

#include "robench/dct_codec.hpp"
#include "robench/detector.hpp"
#include "robench/distortion.hpp"
#include "robench/hog.hpp"
#include "robench/scene.hpp"

using namespace robench;

namespace {

const Scene& scene() {
  static const Scene s = [] {
    SceneConfig c;
    c.frames = 8;
    return synth_scene(c);
  }();
  return s;
}

const DetectorModel& model() {
  static const DetectorModel m =
      build_model(scene().frames, scene().ground_truth, DetectorModel{}, 8);
  return m;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_codec(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(compress_dct(scene().frames[0], 30, exec_of(st)));
}

void BM_noise(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(add_gaussian_noise(scene().frames[0], 0.05, 1, exec_of(st)));
}

void BM_downscale(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(downscale(scene().frames[0], 0.37, exec_of(st)));
}

void BM_detect(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(detect(scene().frames, model(), exec_of(st)));
}

void BM_hog_map(benchmark::State& st) {
  const auto plane = luma_plane(scene().frames[0]);
  for (auto _ : st) benchmark::DoNotOptimize(HogFeatureMap(plane));
}

}  // namespace

BENCHMARK(BM_codec)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_noise)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_downscale)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_detect)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hog_map)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

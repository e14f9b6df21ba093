#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "robench/detection_eval.hpp"
#include "robench/image.hpp"
#include "robench/manifest.hpp"

namespace robench {

/// Straight-line path of one actor, in pixel coordinates of its top-left
/// corner at the first and last frame.
struct ActorPath {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
};

/// Procedural value-noise background.
struct BackgroundParams {
  double base = 128.0;      // mean intensity
  double amplitude = 24.0;  // peak deviation of the coarsest octave
  int cell = 16;            // lattice spacing of the coarsest octave, pixels
  int octaves = 3;
};

/// Fixed-camera scene of upright textured rectangles ("actors") of constant
/// height moving along straight lines over a static background.
struct SceneConfig {
  int width = 320;
  int height = 240;
  int frames = 60;
  int actor_count = 4;
  int actor_height = 64;
  double actor_aspect = 0.5;  // width / height
  /// Mean distance of actor bodies from the background base, grey levels.
  /// Half the actors are darker, half brighter, each jittered by ±15.
  double actor_contrast = 72.0;
  std::uint64_t texture_seed = 7;
  /// Standard deviation of per-frame sensor noise, in grey levels.
  double sensor_noise = 2.0;
  /// One path per actor; generated from texture_seed when empty.
  std::vector<ActorPath> paths;
  BackgroundParams background;

  int actor_width() const;
  /// Throws ArgumentError when actors cannot fit inside the frame.
  void validate() const;
};

nlohmann::json scene_config_to_json(const SceneConfig& c);
/// Missing keys keep their defaults; throws ConfigError on bad types or values.
SceneConfig scene_config_from_json(const nlohmann::json& j);

struct Scene {
  std::vector<Image> frames;
  std::vector<GroundTruthFrame> ground_truth;  // one entry per frame
};

/// Identical configurations yield bit-identical frames and boxes.
Scene synth_scene(const SceneConfig& cfg);

/// Writes frames, gt.csv and manifest.json under `dir`; returns the manifest.
SequenceManifest write_scene(const Scene& scene, const std::string& sequence_id,
                             const std::filesystem::path& dir);

}  // namespace robench

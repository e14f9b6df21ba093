#include "robench/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "robench/error.hpp"
#include "robench/distortion.hpp"
#include "robench/hash.hpp"
#include "robench/netpbm.hpp"

namespace fs = std::filesystem;

namespace robench {

namespace {

// Salts keep the independent random streams of one seed apart.
constexpr std::uint64_t kBackgroundSalt = 0x6267;
constexpr std::uint64_t kPathSalt = 0x7061;
constexpr std::uint64_t kActorSalt = 0x6163;
constexpr std::uint64_t kSensorSalt = 0x736e;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear interpolation of hashed lattice values in [-1,1].
double lattice_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  auto v = [&](std::int64_t dx, std::int64_t dy) {
    return 2.0 * unit_interval(hash_key(seed, static_cast<std::uint64_t>(ix + dx),
                                        static_cast<std::uint64_t>(iy + dy))) -
           1.0;
  };
  const double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
  const double top = v(0, 0) + (v(1, 0) - v(0, 0)) * tx;
  const double bottom = v(0, 1) + (v(1, 1) - v(0, 1)) * tx;
  return top + (bottom - top) * ty;
}

double background_value(const BackgroundParams& bg, std::uint64_t seed, int x, int y) {
  double v = bg.base;
  double amp = bg.amplitude;
  double cell = bg.cell;
  for (int o = 0; o < bg.octaves; ++o) {
    v += amp * lattice_noise(hash_key(seed, kBackgroundSalt, static_cast<std::uint64_t>(o)),
                             (x + 0.5) / cell, (y + 0.5) / cell);
    amp *= 0.5;
    cell = std::max(1.0, cell * 0.5);
  }
  return v;
}

struct ActorLook {
  double base = 0.0;
  std::uint64_t texture_seed = 0;
};

// Dark or bright body with a fine texture that travels with the actor.
ActorLook actor_look(const SceneConfig& c, int actor) {
  const auto h = hash_key(c.texture_seed, kActorSalt, static_cast<std::uint64_t>(actor));
  const bool bright = (h & 1) != 0;
  const double offset = c.actor_contrast + 30.0 * unit_interval(splitmix64(h)) - 15.0;
  return {c.background.base + (bright ? offset : -offset), splitmix64(h ^ 0x74)};
}

std::vector<ActorPath> generated_paths(const SceneConfig& c) {
  std::vector<ActorPath> paths;
  const int aw = c.actor_width();
  const int y_max = c.height - c.actor_height;
  for (int i = 0; i < c.actor_count; ++i) {
    // Disjoint vertical strips, so generated actors never overlap.
    const int left = static_cast<int>(static_cast<std::int64_t>(i) * c.width / c.actor_count);
    const int right =
        static_cast<int>(static_cast<std::int64_t>(i + 1) * c.width / c.actor_count);
    const int x_max = right - aw;
    auto draw = [&](std::uint64_t k, int lo, int hi) {
      const double u = unit_interval(hash_key(c.texture_seed, kPathSalt,
                                              static_cast<std::uint64_t>(i), k));
      return std::floor(lo + u * (hi - lo + 1 - 1e-9));
    };
    paths.push_back({draw(0, left, x_max), draw(1, 0, y_max), draw(2, left, x_max),
                     draw(3, 0, y_max)});
  }
  return paths;
}

}  // namespace

int SceneConfig::actor_width() const {
  return std::max(1, static_cast<int>(round_half_away(actor_height * actor_aspect)));
}

void SceneConfig::validate() const {
  if (width < 1 || height < 1) throw ArgumentError("scene size must be positive");
  if (frames < 1) throw ArgumentError("scene needs at least one frame");
  if (actor_count < 0) throw ArgumentError("actor count must be non-negative");
  if (actor_height < 16)
    throw ArgumentError(fmt::format("actor height must be at least 16, got {}", actor_height));
  if (!(actor_aspect > 0.0)) throw ArgumentError("actor aspect must be positive");
  if (!(actor_contrast >= 0.0)) throw ArgumentError("actor contrast must be non-negative");
  if (!(sensor_noise >= 0.0)) throw ArgumentError("sensor noise must be non-negative");
  if (background.cell < 1 || background.octaves < 1 || !(background.amplitude >= 0.0))
    throw ArgumentError("invalid background parameters");
  const int aw = actor_width();
  if (actor_count == 0) return;
  if (actor_height > height || aw > width)
    throw ArgumentError(fmt::format("{}x{} actors cannot fit in a {}x{} frame", aw, actor_height,
                                    width, height));
  if (paths.empty()) {
    if (static_cast<std::int64_t>(width) / actor_count < aw)
      throw ArgumentError(fmt::format("{} actors of width {} cannot fit side by side in width {}",
                                      actor_count, aw, width));
    return;
  }
  if (paths.size() != static_cast<std::size_t>(actor_count))
    throw ArgumentError(
        fmt::format("{} paths given for {} actors", paths.size(), actor_count));
  const double x_max = width - aw, y_max = height - actor_height;
  for (const auto& p : paths)
    for (auto [x, y] : {std::pair{p.x0, p.y0}, std::pair{p.x1, p.y1}})
      if (!(x >= 0.0 && x <= x_max && y >= 0.0 && y <= y_max))
        throw ArgumentError(fmt::format("actor path endpoint ({}, {}) leaves the frame", x, y));
}

nlohmann::json scene_config_to_json(const SceneConfig& c) {
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : c.paths) paths.push_back({p.x0, p.y0, p.x1, p.y1});
  return {{"width", c.width},
          {"height", c.height},
          {"frames", c.frames},
          {"actor_count", c.actor_count},
          {"actor_height", c.actor_height},
          {"actor_aspect", c.actor_aspect},
          {"actor_contrast", c.actor_contrast},
          {"texture_seed", c.texture_seed},
          {"sensor_noise", c.sensor_noise},
          {"paths", std::move(paths)},
          {"background",
           {{"base", c.background.base},
            {"amplitude", c.background.amplitude},
            {"cell", c.background.cell},
            {"octaves", c.background.octaves}}}};
}

SceneConfig scene_config_from_json(const nlohmann::json& j) {
  SceneConfig c;
  try {
    if (!j.is_object()) throw ConfigError("scene config must be a JSON object");
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.frames = j.value("frames", c.frames);
    c.actor_count = j.value("actor_count", c.actor_count);
    c.actor_height = j.value("actor_height", c.actor_height);
    c.actor_aspect = j.value("actor_aspect", c.actor_aspect);
    c.actor_contrast = j.value("actor_contrast", c.actor_contrast);
    c.texture_seed = j.value("texture_seed", c.texture_seed);
    c.sensor_noise = j.value("sensor_noise", c.sensor_noise);
    if (j.contains("paths")) {
      for (const auto& p : j.at("paths")) {
        if (!p.is_array() || p.size() != 4)
          throw ConfigError("each path is [x0, y0, x1, y1]");
        c.paths.push_back(
            {p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>()});
      }
    }
    if (j.contains("background")) {
      const auto& b = j.at("background");
      c.background.base = b.value("base", c.background.base);
      c.background.amplitude = b.value("amplitude", c.background.amplitude);
      c.background.cell = b.value("cell", c.background.cell);
      c.background.octaves = b.value("octaves", c.background.octaves);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("scene config: {}", e.what()));
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(fmt::format("scene config: {}", e.what()));
  }
  return c;
}

Scene synth_scene(const SceneConfig& cfg) {
  cfg.validate();
  const auto paths = cfg.paths.empty() ? generated_paths(cfg) : cfg.paths;
  const int aw = cfg.actor_width();
  const int ah = cfg.actor_height;

  std::vector<double> background(static_cast<std::size_t>(cfg.width) *
                                 static_cast<std::size_t>(cfg.height));
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      background[static_cast<std::size_t>(y) * static_cast<std::size_t>(cfg.width) +
                 static_cast<std::size_t>(x)] =
          background_value(cfg.background, cfg.texture_seed, x, y);

  std::vector<ActorLook> looks;
  for (int i = 0; i < cfg.actor_count; ++i) looks.push_back(actor_look(cfg, i));

  Scene scene;
  for (int t = 0; t < cfg.frames; ++t) {
    const double u = cfg.frames > 1 ? static_cast<double>(t) / (cfg.frames - 1) : 0.0;
    std::vector<double> canvas = background;
    GroundTruthFrame gt{t, {}};
    for (int i = 0; i < cfg.actor_count; ++i) {
      const auto& p = paths[static_cast<std::size_t>(i)];
      const int ax = static_cast<int>(round_half_away(p.x0 + (p.x1 - p.x0) * u));
      const int ay = static_cast<int>(round_half_away(p.y0 + (p.y1 - p.y0) * u));
      const auto& look = looks[static_cast<std::size_t>(i)];
      for (int y = 0; y < ah; ++y)
        for (int x = 0; x < aw; ++x)
          canvas[static_cast<std::size_t>(ay + y) * static_cast<std::size_t>(cfg.width) +
                 static_cast<std::size_t>(ax + x)] =
              look.base + 12.0 * lattice_noise(look.texture_seed, x / 4.0, y / 4.0);
      gt.boxes.push_back({static_cast<double>(ax), static_cast<double>(ay),
                          static_cast<double>(aw), static_cast<double>(ah)});
    }
    if (cfg.sensor_noise > 0.0) {
      const auto seed = hash_key(cfg.texture_seed, kSensorSalt, static_cast<std::uint64_t>(t));
      for (std::size_t k = 0; k < canvas.size(); k += 2) {
        const auto [n0, n1] = normal_pair(seed, k / 2);
        canvas[k] += cfg.sensor_noise * n0;
        if (k + 1 < canvas.size()) canvas[k + 1] += cfg.sensor_noise * n1;
      }
    }
    Image frame(cfg.width, cfg.height, 1);
    auto s = frame.samples();
    for (std::size_t k = 0; k < canvas.size(); ++k) s[k] = to_byte(canvas[k]);
    scene.frames.push_back(std::move(frame));
    scene.ground_truth.push_back(std::move(gt));
  }
  return scene;
}

SequenceManifest write_scene(const Scene& scene, const std::string& sequence_id,
                             const fs::path& dir) {
  if (scene.frames.empty()) throw ArgumentError("scene has no frames");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  SequenceManifest m;
  m.sequence_id = sequence_id;
  m.role = SequenceRole::reference;
  const PnmFormat format = format_for_channels(scene.frames.front().channels());
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    m.frame_paths.push_back(dir / frame_name(i, format));
    save_frame(scene.frames[i], m.frame_paths.back(), format);
  }
  {
    std::ofstream gt(dir / "gt.csv", std::ios::binary);
    gt << ground_truth_csv(scene.ground_truth);
    if (!gt) throw IoError(fmt::format("cannot write {}", (dir / "gt.csv").string()));
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace robench

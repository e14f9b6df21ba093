#include "robench/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

namespace {

struct PreparedTemplate {
  std::vector<double> centred;
  double norm = 0.0;
};

std::vector<PreparedTemplate> prepare(const DetectorModel& m) {
  std::vector<PreparedTemplate> out;
  for (const auto& t : m.templates) {
    PreparedTemplate p;
    double mean = 0.0;
    for (double v : t.values) mean += v;
    mean /= static_cast<double>(t.values.size());
    double sq = 0.0;
    for (double v : t.values) {
      p.centred.push_back(v - mean);
      sq += (v - mean) * (v - mean);
    }
    p.norm = std::sqrt(sq);
    out.push_back(std::move(p));
  }
  return out;
}

// Correlation from raw sums: the template is centred, so sum(w·t') equals
// sum(w'·t') and only the window's own statistics need centring.
double correlate(std::span<const double> dots, double sum, double sum_sq, double n,
                 std::span<const PreparedTemplate> ts) {
  const double var = sum_sq - sum * sum / n;
  if (!(var > 0.0)) return 0.0;
  const double wnorm = std::sqrt(var);
  double best = -1.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double s = ts[i].norm > 0.0 ? dots[i] / (wnorm * ts[i].norm) : 0.0;
    best = std::max(best, s);
  }
  return best;
}

BoundingBox clamp_to_frame(BoundingBox b, int width, int height) {
  const double x0 = std::clamp(b.x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(b.y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(b.x + b.w, 0.0, static_cast<double>(width));
  const double y1 = std::clamp(b.y + b.h, 0.0, static_cast<double>(height));
  return {x0, y0, x1 - x0, y1 - y0};
}

void check_frame(int width, int height, const DetectorModel& m) {
  if (width < m.window_width || height < m.window_height)
    throw SizeError(fmt::format("{}x{} frame is smaller than the {}x{} detection window", width,
                                height, m.window_width, m.window_height));
}

}  // namespace

void DetectorModel::validate() const {
  if (window_width <= 0 || window_height <= 0 || window_width % kHogCell != 0 ||
      window_height % kHogCell != 0)
    throw ArgumentError(fmt::format("window {}x{} must be a positive multiple of {} pixels",
                                    window_width, window_height, kHogCell));
  if (cells_x() < kHogBlock || cells_y() < kHogBlock)
    throw ArgumentError("window must span at least one block");
  if (object_width <= 0 || object_height <= 0 || object_x < 0 || object_y < 0 ||
      object_x + object_width > window_width || object_y + object_height > window_height)
    throw ArgumentError("object box must lie inside the window");
  if (scales_per_octave < 1) throw ArgumentError("scales per octave must be positive");
  if (upscale_levels < 0) throw ArgumentError("upscale levels must be non-negative");
  if (smoothing < 0) throw ArgumentError("smoothing passes must be non-negative");
  if (stride != kHogCell)
    throw ArgumentError(fmt::format("only a stride of {} pixels is supported", kHogCell));
  if (!std::isfinite(score_threshold)) throw ArgumentError("score threshold must be finite");
  if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) throw ArgumentError("NMS IoU must be in [0,1]");
  const std::size_t want = static_cast<std::size_t>((cells_x() - kHogBlock + 1) *
                                                    (cells_y() - kHogBlock + 1)) *
                           kHogBlockLength;
  for (const auto& t : templates)
    if (t.values.size() != want || t.blocks_x != cells_x() - kHogBlock + 1)
      throw ArgumentError(
          fmt::format("template has {} values, the window needs {}", t.values.size(), want));
}

nlohmann::json model_to_json(const DetectorModel& m) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : m.templates)
    templates.push_back({{"blocks_x", t.blocks_x}, {"blocks_y", t.blocks_y}, {"values", t.values}});
  return {{"window", {m.window_width, m.window_height}},
          {"object", {m.object_x, m.object_y, m.object_width, m.object_height}},
          {"scales_per_octave", m.scales_per_octave},
          {"upscale_levels", m.upscale_levels},
          {"smoothing", m.smoothing},
          {"stride", m.stride},
          {"score_threshold", m.score_threshold},
          {"nms_iou", m.nms_iou},
          {"templates", std::move(templates)}};
}

DetectorModel model_from_json(const nlohmann::json& j) {
  DetectorModel m;
  try {
    const auto& w = j.at("window");
    m.window_width = w.at(0).get<int>();
    m.window_height = w.at(1).get<int>();
    const auto& o = j.at("object");
    m.object_x = o.at(0).get<int>();
    m.object_y = o.at(1).get<int>();
    m.object_width = o.at(2).get<int>();
    m.object_height = o.at(3).get<int>();
    m.scales_per_octave = j.value("scales_per_octave", m.scales_per_octave);
    m.upscale_levels = j.value("upscale_levels", m.upscale_levels);
    m.smoothing = j.value("smoothing", m.smoothing);
    m.stride = j.value("stride", m.stride);
    m.score_threshold = j.value("score_threshold", m.score_threshold);
    m.nms_iou = j.value("nms_iou", m.nms_iou);
    for (const auto& t : j.at("templates"))
      m.templates.push_back({t.at("blocks_x").get<int>(), t.at("blocks_y").get<int>(),
                             t.at("values").get<std::vector<double>>()});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("detector model: {}", e.what()));
  }
  try {
    m.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(fmt::format("detector model: {}", e.what()));
  }
  if (m.templates.empty()) throw ConfigError("detector model: no templates");
  return m;
}

DetectorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return model_from_json(j);
}

void save_model(const DetectorModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << model_to_json(m).dump() << '\n';
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
}

HogDescriptor hog(const Image& img, int x0, int y0, const DetectorModel& model) {
  return hog(smooth(luma_plane(img), model.smoothing), x0, y0, model.cells_x(), model.cells_y());
}

DetectorModel build_model(std::span<const Image> frames, std::span<const GroundTruthFrame> gts,
                          DetectorModel geometry, int exemplars, TemplateMode mode) {
  geometry.validate();
  if (exemplars < 1) throw ArgumentError("need at least one exemplar");
  if (frames.size() != gts.size())
    throw SizeError(fmt::format("{} frames but {} ground-truth frames", frames.size(),
                                gts.size()));

  struct Candidate {
    std::size_t frame;
    double x0, y0, scale;
  };
  std::vector<Candidate> usable;
  for (std::size_t f = 0; f < gts.size(); ++f)
    for (const auto& b : gts[f].boxes) {
      const double scale = b.h / geometry.object_height;
      const double x0 = b.x - geometry.object_x * scale;
      const double y0 = b.y - geometry.object_y * scale;
      if (x0 >= 0.0 && y0 >= 0.0 && x0 + geometry.window_width * scale <= frames[f].width() &&
          y0 + geometry.window_height * scale <= frames[f].height())
        usable.push_back({f, x0, y0, scale});
    }
  if (usable.empty()) throw ArgumentError("no ground-truth box has its context window in frame");

  const std::size_t n = std::min(usable.size(), static_cast<std::size_t>(exemplars));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = usable[i * usable.size() / n];
    const Plane plane = smooth(luma_plane(frames[c.frame]), geometry.smoothing);
    const bool exact = c.scale == 1.0 && c.x0 == std::floor(c.x0) && c.y0 == std::floor(c.y0);
    if (exact) {
      geometry.templates.push_back(hog(plane, static_cast<int>(c.x0), static_cast<int>(c.y0),
                                       geometry.cells_x(), geometry.cells_y()));
    } else {
      const int w = std::max(1, static_cast<int>(round_half_away(geometry.window_width * c.scale)));
      const int h = std::max(1, static_cast<int>(round_half_away(geometry.window_height * c.scale)));
      const int x = std::min(static_cast<int>(round_half_away(c.x0)), plane.width - w);
      const int y = std::min(static_cast<int>(round_half_away(c.y0)), plane.height - h);
      const Plane win =
          resample(crop(plane, x, y, w, h), geometry.window_width, geometry.window_height);
      geometry.templates.push_back(hog(win, 0, 0, geometry.cells_x(), geometry.cells_y()));
    }
  }
  if (mode == TemplateMode::mean && geometry.templates.size() > 1) {
    HogDescriptor mean = geometry.templates.front();
    for (std::size_t i = 1; i < geometry.templates.size(); ++i)
      for (std::size_t k = 0; k < mean.values.size(); ++k)
        mean.values[k] += geometry.templates[i].values[k];
    for (auto& v : mean.values) v /= static_cast<double>(geometry.templates.size());
    geometry.templates = {std::move(mean)};
  }
  return geometry;
}

double window_score(const DetectorModel& model, std::span<const double> window) {
  const auto ts = prepare(model);
  std::vector<double> dots(ts.size(), 0.0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < window.size(); ++k) {
    sum += window[k];
    sum_sq += window[k] * window[k];
    for (std::size_t i = 0; i < ts.size(); ++i) dots[i] += window[k] * ts[i].centred.at(k);
  }
  return correlate(dots, sum, sum_sq, static_cast<double>(window.size()), ts);
}

std::vector<Detection> candidate_windows(const Plane& plane, const DetectorModel& model,
                                         int frame_id) {
  model.validate();
  if (model.templates.empty()) throw ArgumentError("detector model has no templates");
  check_frame(plane.width, plane.height, model);
  const auto ts = prepare(model);
  const int wbx = model.cells_x() - kHogBlock + 1;
  const int wby = model.cells_y() - kHogBlock + 1;
  const double n = static_cast<double>(wbx * wby * kHogBlockLength);

  const Plane base = smooth(plane, model.smoothing);
  std::vector<Detection> out;
  std::vector<double> dots(ts.size());
  for (int k = -model.upscale_levels;; ++k) {
    const double s = std::exp2(-static_cast<double>(k) / model.scales_per_octave);
    const int lw = static_cast<int>(round_half_away(plane.width * s));
    const int lh = static_cast<int>(round_half_away(plane.height * s));
    if (lw < model.window_width || lh < model.window_height) break;
    const Plane level = lw == plane.width && lh == plane.height ? base : resample(base, lw, lh);
    const HogFeatureMap map(level);
    const double sx = static_cast<double>(lw) / plane.width;
    const double sy = static_cast<double>(lh) / plane.height;
    std::vector<double> block_sum, block_sq;
    for (int by = 0; by < map.blocks_y(); ++by)
      for (int bx = 0; bx < map.blocks_x(); ++bx) {
        double s1 = 0.0, s2 = 0.0;
        for (double v : map.block(bx, by)) {
          s1 += v;
          s2 += v * v;
        }
        block_sum.push_back(s1);
        block_sq.push_back(s2);
      }

    for (int cy = 0; cy + model.cells_y() <= map.cells_y(); ++cy)
      for (int cx = 0; cx + model.cells_x() <= map.cells_x(); ++cx) {
        std::fill(dots.begin(), dots.end(), 0.0);
        double sum = 0.0, sum_sq = 0.0;
        std::size_t off = 0;
        for (int by = 0; by < wby; ++by)
          for (int bx = 0; bx < wbx; ++bx, off += kHogBlockLength) {
            const auto b = map.block(cx + bx, cy + by);
            const auto bi = static_cast<std::size_t>((cy + by) * map.blocks_x() + cx + bx);
            sum += block_sum[bi];
            sum_sq += block_sq[bi];
            for (std::size_t i = 0; i < ts.size(); ++i) {
              const double* t = ts[i].centred.data() + off;
              double d = 0.0;
              for (int q = 0; q < kHogBlockLength; ++q) d += b[q] * t[q];
              dots[i] += d;
            }
          }
        const double score = correlate(dots, sum, sum_sq, n, ts);
        if (score < model.score_threshold) continue;
        const BoundingBox box{(cx * kHogCell + model.object_x) / sx,
                              (cy * kHogCell + model.object_y) / sy, model.object_width / sx,
                              model.object_height / sy};
        out.push_back({frame_id, clamp_to_frame(box, plane.width, plane.height), score});
      }
  }
  return out;
}

std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_threshold) {
  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x != b.box.x) return a.box.x < b.box.x;
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    if (a.box.w != b.box.w) return a.box.w < b.box.w;
    return a.box.h < b.box.h;
  });
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    bool keep = true;
    for (const auto& k : kept)
      if (iou(d.box, k.box) > iou_threshold) {
        keep = false;
        break;
      }
    if (keep) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> detect_frame(const Image& frame, const DetectorModel& model, int frame_id) {
  check_frame(frame.width(), frame.height(), model);
  return non_max_suppression(candidate_windows(luma_plane(frame), model, frame_id),
                             model.nms_iou);
}

std::vector<Detection> detect(std::span<const Image> frames, const DetectorModel& model,
                              Exec exec) {
  std::vector<std::vector<Detection>> per_frame(frames.size());
  for_each_index(exec, static_cast<std::ptrdiff_t>(frames.size()), [&](std::ptrdiff_t i) {
    const auto f = static_cast<std::size_t>(i);
    per_frame[f] = detect_frame(frames[f], model, static_cast<int>(i));
  });
  std::vector<Detection> out;
  for (auto& v : per_frame) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace robench

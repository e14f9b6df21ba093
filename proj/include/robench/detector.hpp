#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "robench/detection_eval.hpp"
#include "robench/hog.hpp"
#include "robench/image.hpp"
#include "robench/parallel.hpp"

namespace robench {

/// HOG template detector. The window is the scanned region; the object box
/// sits inside it with a margin of context, and is what detections report.
struct DetectorModel {
  int window_width = 48;
  int window_height = 80;
  int object_x = 8;
  int object_y = 8;
  int object_width = 32;
  int object_height = 64;
  /// Pyramid level k is scaled by 2^(-k/scales_per_octave).
  int scales_per_octave = 8;
  /// Levels with k < 0 enlarge the frame; this many are scanned, which lets
  /// objects down to object_height·2^(-upscale_levels/scales_per_octave) be found.
  int upscale_levels = 4;
  int stride = kHogCell;
  /// Passes of the binomial pre-filter applied to the frame luma before
  /// gradients (see smooth()); damps sensor noise and codec ringing.
  int smoothing = 2;
  double score_threshold = 0.4;
  double nms_iou = 0.5;
  std::vector<HogDescriptor> templates;

  int cells_x() const noexcept { return window_width / kHogCell; }
  int cells_y() const noexcept { return window_height / kHogCell; }
  /// Throws ArgumentError on inconsistent geometry or templates.
  void validate() const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

nlohmann::json model_to_json(const DetectorModel& m);
/// Throws ConfigError on malformed or invalid models.
DetectorModel model_from_json(const nlohmann::json& j);
DetectorModel load_model(const std::filesystem::path& path);
void save_model(const DetectorModel& m, const std::filesystem::path& path);

/// Descriptor of the model window with top-left pixel (x0, y0), after the
/// model's smoothing of the whole frame.
HogDescriptor hog(const Image& img, int x0, int y0, const DetectorModel& model);

enum class TemplateMode {
  exemplars,  // one template per exemplar crop
  mean,       // a single template: the mean of the exemplar descriptors
};

/// Crops `exemplars` windows around ground-truth boxes, spread evenly over
/// all boxes whose context window lies inside its frame, and turns them into
/// templates. Boxes of a different size than the object box are resampled to
/// it. Throws ArgumentError when no usable box exists.
DetectorModel build_model(std::span<const Image> frames, std::span<const GroundTruthFrame> gts,
                          DetectorModel geometry, int exemplars = 16,
                          TemplateMode mode = TemplateMode::mean);

/// Zero-mean normalized correlation of a window descriptor with each template;
/// the maximum is returned. A constant descriptor scores 0.
double window_score(const DetectorModel& model, std::span<const double> window);

/// Every scanned window scoring at least the threshold, before suppression,
/// in frame coordinates and clamped to the frame. `plane` is the frame luma;
/// the model's smoothing is applied here.
std::vector<Detection> candidate_windows(const Plane& plane, const DetectorModel& model,
                                         int frame_id = 0);

/// Greedy suppression after sorting by (score desc, x, y): a box is kept when
/// its IoU with every kept box is at most `iou_threshold`.
std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_threshold);

/// Throws SizeError when the frame is smaller than the window.
std::vector<Detection> detect_frame(const Image& frame, const DetectorModel& model,
                                    int frame_id = 0);

/// Frame-parallel detection; frame i gets frame_id i. Output is ordered by
/// frame and is independent of the thread count.
std::vector<Detection> detect(std::span<const Image> frames, const DetectorModel& model,
                              Exec exec = Exec::parallel);

}  // namespace robench

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace robench {

/// Axis-aligned box: top-left corner plus extent, in pixels.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }
  bool valid() const noexcept { return w > 0.0 && h > 0.0; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  int frame_id = 0;
  BoundingBox box;
  double score = 0.0;
};

struct GroundTruthFrame {
  int frame_id = 0;
  std::vector<BoundingBox> boxes;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

inline constexpr double kMatchIou = 0.5;

struct MatchResult {
  /// For each input detection, the matched ground-truth index or -1.
  std::vector<int> matched_gt;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

/// Greedy one-to-one matching of a single frame. Detections are visited by
/// descending score (input order on ties); each takes the still-unmatched
/// ground truth of highest IoU, provided IoU > thresh.
MatchResult match_frame(std::span<const Detection> dts, std::span<const BoundingBox> gts,
                        double thresh = kMatchIou);

struct CurvePoint {
  double threshold = 0.0;  // +inf for the empty-detection endpoint
  double fppi = 0.0;
  double miss_rate = 1.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

/// Miss rate against false positives per image, one point per distinct score
/// threshold in descending order, starting at (0, 1) for threshold +inf.
struct MrFppiCurve {
  std::vector<CurvePoint> points;
};

/// Sweeps every distinct detection score. `gts` lists every evaluated frame,
/// including frames without boxes; its size is the FPPI denominator.
/// Throws ZeroGroundTruthError when no frame has a box and FormatError for a
/// detection on a frame that is not listed.
MrFppiCurve mr_fppi_curve(std::span<const Detection> dts, std::span<const GroundTruthFrame> gts);

/// FPPI reference points 10^(-2 + k/4), k = 0..8.
std::array<double, 9> fppi_reference_points();

/// Miss rate at each reference point, read from the curve point with the
/// largest fppi not exceeding it (the lowest miss rate among equal fppi).
std::array<double, 9> sample_miss_rates(const MrFppiCurve& curve);

/// Arithmetic mean of sample_miss_rates.
double log_avg_miss_rate(const MrFppiCurve& curve);

/// 1 - mr; throws ArgumentError outside [0,1].
double accuracy(double mr);

struct AccuracyResult {
  double mr = 1.0;
  double accuracy = 0.0;
  std::array<double, 9> samples{};
  MrFppiCurve curve;
};

AccuracyResult evaluate(std::span<const Detection> dts, std::span<const GroundTruthFrame> gts);

struct HeightStats {
  double mu_h = 0.0;
  double sigma_h = 0.0;  // population standard deviation
  double h_vc = 0.0;     // sigma_h / mu_h
};

/// Throws ZeroGroundTruthError when there are no boxes.
HeightStats height_stats(std::span<const GroundTruthFrame> gts);

// CSV contracts ------------------------------------------------------------

/// Rows frame_id,x,y,w,h. Frames 0..frame_count-1 are always present in the
/// result; frame_count defaults to one past the largest frame id.
std::vector<GroundTruthFrame> parse_ground_truth_csv(const std::string& text,
                                                     std::optional<int> frame_count = std::nullopt);
std::string ground_truth_csv(std::span<const GroundTruthFrame> gts);

/// Rows frame_id,x,y,w,h,score.
std::vector<Detection> parse_detections_csv(const std::string& text);
std::string detections_csv(std::span<const Detection> dts);

/// Rows threshold,fppi,miss_rate.
std::string curve_csv(const MrFppiCurve& curve);

}  // namespace robench

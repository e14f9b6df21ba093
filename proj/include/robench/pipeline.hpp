#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robench/detection_eval.hpp"
#include "robench/detector.hpp"
#include "robench/distortion.hpp"
#include "robench/ladder.hpp"
#include "robench/manifest.hpp"
#include "robench/stability.hpp"

namespace robench {

inline constexpr std::string_view kToolkitVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

/// Evaluation of one sequence, as written by `robench eval`.
struct EvalRecord {
  std::string sequence_id;
  SequenceRole role = SequenceRole::reference;
  std::optional<DistortionSpec> distortion;
  int frames = 0;
  int gt_count = 0;
  AccuracyResult result;
};

nlohmann::json eval_record_to_json(const EvalRecord& r);
/// Reads the fields needed downstream (the curve itself is not restored).
EvalRecord eval_record_from_json(const nlohmann::json& j);

/// Accuracy of one distorted version.
struct LevelOutcome {
  std::string sequence_id;
  DistortionSpec spec;
  double mr = 1.0;
  double accuracy = 0.0;
};

/// Everything needed to audit a stability result offline: the accuracies it
/// was computed from, the quality of each version and the penalties.
struct RunReport {
  std::string detector_id;
  std::string reference_id;
  double a_ref = 0.0;
  double mr_ref = 1.0;
  double omega = kDefaultOmega;
  double lambda = 5.0;
  std::vector<LadderStatRow> ladder_stats;  // may be empty
  std::vector<LevelOutcome> levels;
  std::vector<LadderAccuracies> ladders;   // derived from levels
  std::optional<StabilityVector> stability;  // set when all four kinds are present
  std::string generated_at;                  // the only time-dependent field
};

/// Groups the levels into ladders and computes the stability components.
/// Throws ArgumentError on an accuracy outside [0,1] or a bad omega.
RunReport make_report(std::string detector_id, std::string reference_id, double mr_ref,
                      std::vector<LevelOutcome> levels, std::vector<LadderStatRow> ladder_stats,
                      double omega, double lambda);

nlohmann::json report_to_json(const RunReport& r);
/// Rebuilds a report from its levels (stability is recomputed, not copied).
/// Throws ConfigError on schema or type errors.
RunReport report_from_json(const nlohmann::json& j);
/// Pretty-printed JSON with a trailing newline.
std::string report_text(const RunReport& r);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

/// Boxes scaled by (sx, sy), for sequences at reduced resolution.
std::vector<GroundTruthFrame> scale_ground_truth(std::span<const GroundTruthFrame> gts, double sx,
                                                 double sy);

/// Detections on frames smaller than the detector window are empty rather
/// than an error: a detector that cannot scan a frame finds nothing in it.
std::vector<Detection> detect_or_empty(std::span<const Image> frames, const DetectorModel& model,
                                       Exec exec);

struct RunOptions {
  std::vector<DistortionKind> kinds{std::begin(kAllKinds), std::end(kAllKinds)};
  LadderConfig ladder = LadderConfig::defaults();
  double omega = kDefaultOmega;
  double lambda = 5.0;
  std::string detector_id = "hog-template";
  Exec exec = Exec::parallel;
  /// Called after each sequence (the reference first) with its outcome.
  std::function<void(const EvalRecord&, std::span<const Detection>)> on_sequence;
};

/// Distorts the reference level by level, runs the detector on every
/// version, evaluates it and assembles the report. The result does not
/// depend on the thread count; generated_at is left empty.
RunReport robustness_run(std::span<const Image> frames, std::span<const GroundTruthFrame> gts,
                         const DetectorModel& model, const std::string& reference_id,
                         const RunOptions& options);

}  // namespace robench

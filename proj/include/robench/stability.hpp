#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "robench/distortion.hpp"

namespace robench {

/// One distorted version's accuracy. `param` is the distortion parameter
/// (QP, scale, sigma or signed offset).
struct LadderEntry {
  int level = 0;
  double param = 0.0;
  double accuracy = 0.0;
};

/// Accuracies of one ladder arranged by decreasing quality. qp/res/wn have a
/// single chain; bv has two, the darker branch first, then the brighter one.
/// The predecessor of the first entry of every chain is the reference.
struct LadderAccuracies {
  DistortionKind kind = DistortionKind::qp;
  double a_ref = 0.0;
  std::vector<std::vector<LadderEntry>> chains;

  std::size_t n_x() const noexcept;
  /// Throws ArgumentError on a wrong chain count, an empty ladder or an
  /// accuracy outside [0,1].
  void validate() const;
};

/// min{1, ((a_i - a_ref)/a_ref)^2}; with a_ref = 0 it is 0 when a_i = 0, else 1.
double degradation_penalty(double a_i, double a_ref);

/// 0 when a_i <= a_prev, else min{1, ((a_i - a_prev)/a_prev)^2}
/// (1 when a_prev = 0).
double monotonicity_penalty(double a_i, double a_prev);

/// Sorts entries into quality-descending chains: ascending QP, descending
/// scale, ascending sigma; brightness splits by sign and sorts each side by
/// |offset|. Throws ArgumentError on duplicate parameters.
LadderAccuracies order_ladder(DistortionKind kind, double a_ref,
                              std::span<const LadderEntry> entries);

inline constexpr double kDefaultOmega = 0.8;

struct LevelPenalty {
  int level = 0;
  double param = 0.0;
  double accuracy = 0.0;
  double pd = 0.0;
  double pm = 0.0;
};

struct PenaltyBreakdown {
  double omega = kDefaultOmega;
  std::vector<LevelPenalty> levels;  // chain order, chains concatenated
};

struct StabilityResult {
  double s = 1.0;
  PenaltyBreakdown breakdown;
};

/// s = 1 - sqrt(mean over levels of omega·PD + (1 - omega)·PM).
StabilityResult stability(const LadderAccuracies& ladder, double omega = kDefaultOmega);

struct StabilityVector {
  double qp = 1.0;
  double res = 1.0;
  double wn = 1.0;
  double bv = 1.0;

  double operator[](DistortionKind kind) const;
  double& operator[](DistortionKind kind);
  friend bool operator==(const StabilityVector&, const StabilityVector&) = default;
};

/// Needs exactly one ladder per kind; throws ArgumentError otherwise.
StabilityVector stability_vector(std::span<const LadderAccuracies> ladders,
                                 double omega = kDefaultOmega);

/// {detector_id, a_ref, omega, per_kind: {kind: {s, levels: [{level, param, a, pd, pm}]}}}
nlohmann::json stability_report_json(const std::string& detector_id,
                                     std::span<const LadderAccuracies> ladders, double omega);

/// Rebuilds the ladders embedded in a stability report (entries keep the
/// stored order).
std::vector<LadderAccuracies> ladders_from_report_json(const nlohmann::json& j);

}  // namespace robench

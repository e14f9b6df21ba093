#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robench/stability.hpp"

namespace robench {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Chart glyph of one detector: centred at x = lambda·a_ref, with the four
/// stability components as corner heights, clockwise from the left-upper
/// corner: qp, res, wn, bv.
struct QuadrangleSpec {
  std::string detector_id;
  double a_ref = 0.0;
  StabilityVector s;
  double lambda = 0.0;
  double half_width = 0.1;
  double cx = 0.0;
  std::array<Point, 4> vertices{};
};

inline constexpr double kDefaultLambda = 5.0;
inline constexpr double kDefaultHalfWidth = 0.1;

/// Throws ArgumentError for a_ref or a component outside [0,1], a negative
/// lambda or a non-positive half width.
QuadrangleSpec quadrangle(std::string detector_id, double a_ref, const StabilityVector& s,
                          double lambda = kDefaultLambda, double half_width = kDefaultHalfWidth);

struct ChartConfig {
  double lambda = kDefaultLambda;
  bool show_ideal = true;
  std::optional<std::pair<double, double>> x_range;  // automatic when unset
  std::pair<double, double> y_range{-0.05, 1.05};    // must cover [0,1]
  std::vector<std::string> legend_labels;            // defaults to detector ids
  std::string title = "Robustness quadrangles";
};

/// SVG 1.1 document with a fixed 1000×600 viewBox. Each polygon carries its
/// detector id, a_ref, lambda, centre and stability components as data
/// attributes; the root carries the axis mapping so the geometry can be read
/// back. Identical inputs give byte-identical output.
std::string render_chart(std::span<const QuadrangleSpec> quads, const ChartConfig& cfg);

/// render_chart to a file; throws IoError when the path cannot be written.
void write_chart(std::span<const QuadrangleSpec> quads, const ChartConfig& cfg,
                 const std::filesystem::path& path);

/// Geometry recovered from an emitted chart, in chart units.
struct ParsedQuadrangle {
  std::string detector_id;
  bool ideal = false;
  double cx = 0.0;
  std::array<Point, 4> vertices{};
};

/// Reads back every polygon of a chart written by render_chart.
std::vector<ParsedQuadrangle> parse_chart(const std::string& svg);

struct RankEntry {
  int rank = 0;
  std::string detector_id;
  double s_value = 0.0;
};

struct RankingTable {
  std::array<std::vector<RankEntry>, 4> per_kind;  // indexed by DistortionKind
  /// Kinds whose ordering needed the detector-id tie-break.
  std::vector<DistortionKind> tie_broken;
};

/// Per kind, detectors by descending component; ties by detector id.
RankingTable rank_by_stability(std::span<const std::pair<std::string, StabilityVector>> results);

/// kind,rank,detector_id,s_value
std::string ranking_csv(const RankingTable& table);

}  // namespace robench

#include "robench/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "robench/csv.hpp"
#include "robench/error.hpp"

namespace robench {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

/// Indices of `dts` by descending score, stable on ties.
std::vector<std::size_t> score_order(std::span<const Detection> dts) {
  std::vector<std::size_t> order(dts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dts[a].score > dts[b].score; });
  return order;
}

}  // namespace

MatchResult match_frame(std::span<const Detection> dts, std::span<const BoundingBox> gts,
                        double thresh) {
  MatchResult r;
  r.matched_gt.assign(dts.size(), -1);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : score_order(dts)) {
    int best = -1;
    double best_iou = thresh;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double o = iou(dts[d].box, gts[g]);
      if (o > best_iou) {
        best_iou = o;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      r.matched_gt[d] = best;
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = static_cast<int>(gts.size()) - r.tp;
  return r;
}

MrFppiCurve mr_fppi_curve(std::span<const Detection> dts, std::span<const GroundTruthFrame> gts) {
  if (gts.empty()) throw ZeroGroundTruthError("no frames to evaluate");
  std::unordered_map<int, std::size_t> frame_index;
  long long total_gt = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!frame_index.emplace(gts[i].frame_id, i).second)
      throw FormatError(fmt::format("duplicate ground-truth frame id {}", gts[i].frame_id));
    total_gt += static_cast<long long>(gts[i].boxes.size());
  }
  if (total_gt == 0) throw ZeroGroundTruthError("ground truth contains no boxes");

  // Group detections per frame, keeping input order.
  std::vector<std::vector<std::size_t>> per_frame(gts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (!std::isfinite(dts[i].score))
      throw FormatError(fmt::format("detection {} has a non-finite score", i));
    const auto it = frame_index.find(dts[i].frame_id);
    if (it == frame_index.end())
      throw FormatError(fmt::format("detection on unknown frame {}", dts[i].frame_id));
    per_frame[it->second].push_back(i);
  }

  // Greedy matching in score order only ever looks at higher-ranked
  // detections, so the match state at threshold t is a prefix of the full run.
  std::vector<bool> is_tp(dts.size(), false);
  for (std::size_t f = 0; f < gts.size(); ++f) {
    std::vector<Detection> local;
    local.reserve(per_frame[f].size());
    for (auto i : per_frame[f]) local.push_back(dts[i]);
    const auto m = match_frame(local, gts[f].boxes);
    for (std::size_t k = 0; k < local.size(); ++k) is_tp[per_frame[f][k]] = m.matched_gt[k] >= 0;
  }

  const double frames = static_cast<double>(gts.size());
  MrFppiCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0, 0, 0,
                          static_cast<int>(total_gt)});
  const auto order = score_order(dts);
  int tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& d = dts[order[k]];
    (is_tp[order[k]] ? tp : fp) += 1;
    if (k + 1 < order.size() && dts[order[k + 1]].score == d.score) continue;
    const int fn = static_cast<int>(total_gt) - tp;
    curve.points.push_back(
        {d.score, fp / frames, static_cast<double>(fn) / static_cast<double>(total_gt), tp, fp, fn});
  }
  return curve;
}

std::array<double, 9> fppi_reference_points() {
  std::array<double, 9> f{};
  for (int k = 0; k < 9; ++k) f[static_cast<std::size_t>(k)] = std::pow(10.0, -2.0 + k / 4.0);
  return f;
}

std::array<double, 9> sample_miss_rates(const MrFppiCurve& curve) {
  const auto refs = fppi_reference_points();
  std::array<double, 9> out{};
  for (std::size_t k = 0; k < refs.size(); ++k) {
    double best_fppi = -1.0;
    double mr = 1.0;
    for (const auto& p : curve.points) {
      if (p.fppi > refs[k]) continue;
      if (p.fppi > best_fppi || (p.fppi == best_fppi && p.miss_rate < mr)) {
        best_fppi = p.fppi;
        mr = p.miss_rate;
      }
    }
    out[k] = mr;
  }
  return out;
}

double log_avg_miss_rate(const MrFppiCurve& curve) {
  const auto s = sample_miss_rates(curve);
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

double accuracy(double mr) {
  if (!(mr >= 0.0 && mr <= 1.0))
    throw ArgumentError(fmt::format("miss rate must be in [0,1], got {}", mr));
  return 1.0 - mr;
}

AccuracyResult evaluate(std::span<const Detection> dts, std::span<const GroundTruthFrame> gts) {
  AccuracyResult r;
  r.curve = mr_fppi_curve(dts, gts);
  r.samples = sample_miss_rates(r.curve);
  r.mr = log_avg_miss_rate(r.curve);
  r.accuracy = accuracy(r.mr);
  return r;
}

HeightStats height_stats(std::span<const GroundTruthFrame> gts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : gts)
    for (const auto& b : f.boxes) {
      sum += b.h;
      ++n;
    }
  if (n == 0) throw ZeroGroundTruthError("height statistics need at least one box");
  HeightStats s;
  s.mu_h = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& f : gts)
    for (const auto& b : f.boxes) ss += (b.h - s.mu_h) * (b.h - s.mu_h);
  s.sigma_h = std::sqrt(ss / static_cast<double>(n));
  s.h_vc = s.sigma_h / s.mu_h;
  return s;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

BoundingBox read_box(const csv::Table& t, std::size_t row) {
  const auto& f = t.rows[row];
  BoundingBox b{csv::to_double(f[t.column("x")]), csv::to_double(f[t.column("y")]),
                csv::to_double(f[t.column("w")]), csv::to_double(f[t.column("h")])};
  if (!b.valid())
    throw FormatError(fmt::format("line {}: box needs positive width and height",
                                  t.line_numbers[row]));
  return b;
}

int read_frame_id(const csv::Table& t, std::size_t row) {
  const auto id = csv::to_int(t.rows[row][t.column("frame_id")]);
  if (id < 0 || id > std::numeric_limits<int>::max())
    throw FormatError(fmt::format("line {}: bad frame id", t.line_numbers[row]));
  return static_cast<int>(id);
}

}  // namespace

std::vector<GroundTruthFrame> parse_ground_truth_csv(const std::string& text,
                                                     std::optional<int> frame_count) {
  const auto t = csv::parse(text);
  std::vector<std::pair<int, BoundingBox>> boxes;
  int max_id = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    boxes.emplace_back(read_frame_id(t, r), read_box(t, r));
    max_id = std::max(max_id, boxes.back().first);
  }
  const int n = frame_count.value_or(max_id + 1);
  if (max_id >= n)
    throw FormatError(fmt::format("ground truth references frame {} but only {} frames exist",
                                  max_id, n));
  std::vector<GroundTruthFrame> frames(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) frames[static_cast<std::size_t>(i)].frame_id = i;
  for (const auto& [id, b] : boxes) frames[static_cast<std::size_t>(id)].boxes.push_back(b);
  return frames;
}

std::string ground_truth_csv(std::span<const GroundTruthFrame> gts) {
  std::string out = "frame_id,x,y,w,h\n";
  for (const auto& f : gts)
    for (const auto& b : f.boxes)
      out += fmt::format("{},{},{},{},{}\n", f.frame_id, b.x, b.y, b.w, b.h);
  return out;
}

std::vector<Detection> parse_detections_csv(const std::string& text) {
  const auto t = csv::parse(text);
  const auto cs = t.column("score");
  std::vector<Detection> dts;
  dts.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Detection d{read_frame_id(t, r), read_box(t, r), csv::to_double(t.rows[r][cs])};
    if (!std::isfinite(d.score))
      throw FormatError(fmt::format("line {}: score must be finite", t.line_numbers[r]));
    dts.push_back(d);
  }
  return dts;
}

std::string detections_csv(std::span<const Detection> dts) {
  std::string out = "frame_id,x,y,w,h,score\n";
  for (const auto& d : dts)
    out += fmt::format("{},{},{},{},{},{}\n", d.frame_id, d.box.x, d.box.y, d.box.w, d.box.h,
                       d.score);
  return out;
}

std::string curve_csv(const MrFppiCurve& curve) {
  std::string out = "threshold,fppi,miss_rate\n";
  for (const auto& p : curve.points)
    out += fmt::format("{},{},{}\n", std::isinf(p.threshold) ? "inf" : fmt::format("{}", p.threshold),
                       p.fppi, p.miss_rate);
  return out;
}

}  // namespace robench

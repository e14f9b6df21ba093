#include "robench/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

namespace {

nlohmann::json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

double number_or_inf(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError(fmt::format("expected a number, got '{}'", s));
  }
  return j.get<double>();
}

std::string_view role_name(SequenceRole r) {
  return r == SequenceRole::reference ? "reference" : "distorted";
}

}  // namespace

nlohmann::json eval_record_to_json(const EvalRecord& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (double s : r.result.samples) samples.push_back(s);
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& p : r.result.curve.points)
    counts.push_back({{"threshold", finite_or_string(p.threshold)},
                      {"tp", p.tp},
                      {"fp", p.fp},
                      {"fn", p.fn}});
  return {{"sequence_id", r.sequence_id},
          {"role", role_name(r.role)},
          {"distortion", r.distortion ? distortion_to_json(*r.distortion) : nlohmann::json()},
          {"frames", r.frames},
          {"gt_count", r.gt_count},
          {"mr", r.result.mr},
          {"accuracy", r.result.accuracy},
          {"samples", std::move(samples)},
          {"counts", std::move(counts)}};
}

EvalRecord eval_record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  try {
    r.sequence_id = j.at("sequence_id").get<std::string>();
    const auto role = j.at("role").get<std::string>();
    if (role != "reference" && role != "distorted")
      throw ConfigError(fmt::format("unknown role '{}'", role));
    r.role = role == "reference" ? SequenceRole::reference : SequenceRole::distorted;
    if (j.contains("distortion") && !j["distortion"].is_null())
      r.distortion = distortion_from_json(j["distortion"]);
    if (r.role == SequenceRole::distorted && !r.distortion)
      throw ConfigError(fmt::format("{}: distorted result without distortion", r.sequence_id));
    r.frames = j.value("frames", 0);
    r.gt_count = j.value("gt_count", 0);
    r.result.mr = j.at("mr").get<double>();
    r.result.accuracy = j.at("accuracy").get<double>();
    if (j.contains("samples")) {
      const auto& s = j["samples"];
      for (std::size_t k = 0; k < r.result.samples.size() && k < s.size(); ++k)
        r.result.samples[k] = s[k].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("evaluation result: {}", e.what()));
  }
  return r;
}

RunReport make_report(std::string detector_id, std::string reference_id, double mr_ref,
                      std::vector<LevelOutcome> levels, std::vector<LadderStatRow> ladder_stats,
                      double omega, double lambda) {
  if (!(omega >= 0.0 && omega <= 1.0))
    throw ArgumentError(fmt::format("omega must be in [0,1], got {}", omega));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ArgumentError(fmt::format("lambda must be non-negative, got {}", lambda));
  RunReport r;
  r.detector_id = std::move(detector_id);
  r.reference_id = std::move(reference_id);
  r.mr_ref = mr_ref;
  r.a_ref = accuracy(mr_ref);
  r.omega = omega;
  r.lambda = lambda;
  r.ladder_stats = std::move(ladder_stats);
  r.levels = std::move(levels);

  bool all = true;
  for (auto kind : kAllKinds) {
    std::vector<LadderEntry> entries;
    for (const auto& l : r.levels)
      if (l.spec.kind == kind) entries.push_back({l.spec.level, l.spec.param, l.accuracy});
    if (entries.empty()) {
      all = false;
      continue;
    }
    r.ladders.push_back(order_ladder(kind, r.a_ref, entries));
    r.ladders.back().validate();
  }
  if (all) r.stability = stability_vector(r.ladders, omega);
  return r;
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& row : r.ladder_stats)
    stats.push_back({{"kind", row.kind},
                     {"level", row.level},
                     {"param", row.param},
                     {"psnr_db", finite_or_string(row.stats.psnr_db)},
                     {"mean_luma", row.stats.mean_luma},
                     {"original_bytes", row.stats.original_bytes},
                     {"encoded_bytes", row.stats.encoded_bytes},
                     {"compression_ratio", row.stats.compression_ratio}});
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"sequence_id", l.sequence_id},
                      {"distortion", distortion_to_json(l.spec)},
                      {"mr", l.mr},
                      {"accuracy", l.accuracy}});
  nlohmann::json s = nlohmann::json::object();
  if (r.stability)
    for (auto kind : kAllKinds) s[std::string(to_string(kind))] = (*r.stability)[kind];
  return {{"schema", kReportSchema},
          {"toolkit_version", kToolkitVersion},
          {"detector_id", r.detector_id},
          {"reference_id", r.reference_id},
          {"a_ref", r.a_ref},
          {"mr_ref", r.mr_ref},
          {"omega", r.omega},
          {"lambda", r.lambda},
          {"ladder_stats", std::move(stats)},
          {"levels", std::move(levels)},
          {"penalties", stability_report_json(r.detector_id, r.ladders, r.omega)},
          {"stability", r.stability ? std::move(s) : nlohmann::json()},
          {"generated_at", r.generated_at}};
}

RunReport report_from_json(const nlohmann::json& j) {
  try {
    const int schema = j.at("schema").get<int>();
    if (schema != kReportSchema)
      throw ConfigError(fmt::format("unsupported report schema {}", schema));
    std::vector<LevelOutcome> levels;
    for (const auto& l : j.at("levels"))
      levels.push_back({l.at("sequence_id").get<std::string>(),
                        distortion_from_json(l.at("distortion")), l.at("mr").get<double>(),
                        l.at("accuracy").get<double>()});
    std::vector<LadderStatRow> stats;
    for (const auto& row : j.at("ladder_stats")) {
      LadderStatRow s;
      s.kind = row.at("kind").get<std::string>();
      s.level = row.at("level").get<int>();
      s.param = row.at("param").get<double>();
      s.stats.psnr_db = number_or_inf(row.at("psnr_db"));
      s.stats.mean_luma = row.at("mean_luma").get<double>();
      s.stats.original_bytes = row.at("original_bytes").get<std::uint64_t>();
      s.stats.encoded_bytes = row.at("encoded_bytes").get<std::uint64_t>();
      s.stats.compression_ratio = row.at("compression_ratio").get<double>();
      stats.push_back(std::move(s));
    }
    RunReport r = make_report(j.at("detector_id").get<std::string>(),
                              j.at("reference_id").get<std::string>(), j.at("mr_ref").get<double>(),
                              std::move(levels), std::move(stats), j.at("omega").get<double>(),
                              j.at("lambda").get<double>());
    r.generated_at = j.value("generated_at", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("run report: {}", e.what()));
  } catch (const ArgumentError& e) {
    throw ConfigError(fmt::format("run report: {}", e.what()));
  }
}

std::string report_text(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<GroundTruthFrame> scale_ground_truth(std::span<const GroundTruthFrame> gts, double sx,
                                                 double sy) {
  std::vector<GroundTruthFrame> out(gts.begin(), gts.end());
  for (auto& f : out)
    for (auto& b : f.boxes) b = {b.x * sx, b.y * sy, b.w * sx, b.h * sy};
  return out;
}

std::vector<Detection> detect_or_empty(std::span<const Image> frames, const DetectorModel& model,
                                       Exec exec) {
  if (frames.empty() || frames.front().width() < model.window_width ||
      frames.front().height() < model.window_height)
    return {};
  return detect(frames, model, exec);
}

RunReport robustness_run(std::span<const Image> frames, std::span<const GroundTruthFrame> gts,
                         const DetectorModel& model, const std::string& reference_id,
                         const RunOptions& options) {
  if (frames.empty()) throw ArgumentError("reference has no frames");
  if (frames.size() != gts.size())
    throw SizeError(fmt::format("{} frames but {} ground-truth frames", frames.size(),
                                gts.size()));
  options.ladder.validate();
  int gt_count = 0;
  for (const auto& f : gts) gt_count += static_cast<int>(f.boxes.size());

  const auto ref_dets = detect(frames, model, options.exec);
  EvalRecord ref{reference_id, SequenceRole::reference, std::nullopt,
                 static_cast<int>(frames.size()), gt_count, evaluate(ref_dets, gts)};
  if (options.on_sequence) options.on_sequence(ref, ref_dets);

  std::vector<LevelOutcome> levels;
  std::vector<LadderStatRow> stats{reference_stat_row(frames)};
  for (auto kind : options.kinds) {
    for (const auto& spec : ladder_specs(kind, options.ladder)) {
      const DistortedSequence d = distort_sequence(frames, spec, options.exec);
      stats.push_back(ladder_stat_row(frames, d));
      const auto& f0 = d.frames.front();
      const auto scaled =
          scale_ground_truth(gts, static_cast<double>(f0.width()) / frames.front().width(),
                             static_cast<double>(f0.height()) / frames.front().height());
      const auto dets = detect_or_empty(d.frames, model, options.exec);
      EvalRecord rec{fmt::format("{}_{}_{:02d}", reference_id, to_string(kind), spec.level),
                     SequenceRole::distorted,
                     spec,
                     static_cast<int>(d.frames.size()),
                     gt_count,
                     evaluate(dets, scaled)};
      if (options.on_sequence) options.on_sequence(rec, dets);
      levels.push_back({rec.sequence_id, spec, rec.result.mr, rec.result.accuracy});
    }
  }
  return make_report(options.detector_id, reference_id, ref.result.mr, std::move(levels),
                     std::move(stats), options.omega, options.lambda);
}

}  // namespace robench

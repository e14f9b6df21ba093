// robench: robustness benchmarking of pedestrian detectors on distorted video.
//
//   synth      write a synthetic reference sequence with ground truth
//   distort    build distortion ladders from a reference manifest
//   train      build a HOG template model from a reference with ground truth
//   detect     run the template detector on a sequence
//   eval       score a detections CSV against ground truth
//   stability  turn per-sequence evaluations into a RunReport and quadrangle
//   report     rank several RunReports and draw them on one chart
//   run        synth-free end-to-end run of the reference detector
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 data error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "robench/csv.hpp"
#include "robench/detector.hpp"
#include "robench/error.hpp"
#include "robench/ladder.hpp"
#include "robench/manifest.hpp"
#include "robench/netpbm.hpp"
#include "robench/pipeline.hpp"
#include "robench/quadrangle.hpp"
#include "robench/scene.hpp"

namespace fs = std::filesystem;
using namespace robench;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
}

std::vector<DistortionKind> parse_kinds(const std::string& list) {
  if (list.empty() || list == "all") return {std::begin(kAllKinds), std::end(kAllKinds)};
  std::vector<DistortionKind> kinds;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const auto k = parse_kind(list.substr(start, end - start));
    if (std::find(kinds.begin(), kinds.end(), k) != kinds.end())
      throw ArgumentError(fmt::format("kind {} listed twice", to_string(k)));
    kinds.push_back(k);
    start = end + 1;
  }
  return kinds;
}

void check_omega_lambda(double omega, double lambda) {
  if (!(omega >= 0.0 && omega <= 1.0))
    throw ArgumentError(fmt::format("--omega must be in [0,1], got {}", omega));
  if (!(lambda >= 0.0)) throw ArgumentError(fmt::format("--lambda must be >= 0, got {}", lambda));
}

SceneConfig scene_config(const std::string& path, std::optional<std::uint64_t> seed) {
  SceneConfig c = path.empty() ? SceneConfig{} : scene_config_from_json(read_json(path));
  if (seed) c.texture_seed = *seed;
  return c;
}

LadderConfig ladder_config(const std::string& path, std::optional<std::uint64_t> seed) {
  LadderConfig c = path.empty() ? LadderConfig::defaults() : ladder_config_from_json(read_json(path));
  if (seed) c.seed = *seed;
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

SequenceManifest load_reference(const std::string& path) {
  if (!fs::exists(path)) throw ArgumentError(fmt::format("reference manifest {} not found", path));
  auto m = load_manifest(path);
  if (m.role != SequenceRole::reference)
    throw ArgumentError(fmt::format("{} is not a reference manifest", path));
  return m;
}

std::vector<GroundTruthFrame> load_gt(const std::string& path, std::optional<int> frames) {
  return parse_ground_truth_csv(csv::read_file(path), frames);
}

// A distorted res manifest records the reference size; its boxes are scaled
// to the reduced frames.
std::vector<GroundTruthFrame> gt_for(const SequenceManifest& m,
                                     std::vector<GroundTruthFrame> gts) {
  if (!m.reference_size || m.frame_paths.empty()) return gts;
  const Image f0 = load_frame(m.frame_paths.front());
  const double sx = static_cast<double>(f0.width()) / m.reference_size->first;
  const double sy = static_cast<double>(f0.height()) / m.reference_size->second;
  if (sx == 1.0 && sy == 1.0) return gts;
  return scale_ground_truth(gts, sx, sy);
}

RunReport report_with_time(RunReport r) {
  r.generated_at = utc_timestamp();
  return r;
}

std::optional<QuadrangleSpec> quad_of(const RunReport& r, double lambda) {
  if (!r.stability) return std::nullopt;
  return quadrangle(r.detector_id, r.a_ref, *r.stability, lambda);
}

void write_quadrangle(const RunReport& r, double lambda, const std::string& path) {
  const auto q = quad_of(r, lambda);
  if (!q) throw ArgumentError("a quadrangle needs all four distortion kinds");
  ChartConfig cfg;
  cfg.lambda = lambda;
  write_chart(std::span(&*q, 1), cfg, path);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config, out, id = "scene";
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  const auto cfg = scene_config(a.config, a.seed);
  const auto scene = synth_scene(cfg);
  write_scene(scene, a.id, a.out);
  write_text(fs::path(a.out) / "scene.json", scene_config_to_json(cfg).dump(2) + "\n");
  std::cout << (fs::path(a.out) / "manifest.json").string() << "\n";
  return 0;
}

struct DistortArgs {
  std::string ref, out, kinds = "all", config;
  std::optional<std::uint64_t> seed;
};

int cmd_distort(const DistortArgs& a) {
  const auto ref = load_reference(a.ref);
  const auto cfg = ladder_config(a.config, a.seed);
  const auto hook = EncoderHook::from_env();
  std::vector<SequenceManifest> all;
  for (auto kind : parse_kinds(a.kinds)) {
    auto ms = build_ladder(ref, kind, cfg, a.out, hook);
    all.insert(all.end(), ms.begin(), ms.end());
  }
  write_text(fs::path(a.out) / "stats.csv", stats_csv(ladder_stats(ref, all)));
  std::cout << all.size() << " distorted sequences\n";
  return 0;
}

struct TrainArgs {
  std::string ref, gt, out;
  int exemplars = 16;
  TemplateMode mode = TemplateMode::mean;
  std::optional<double> threshold;
};

int cmd_train(const TrainArgs& a) {
  const auto ref = load_reference(a.ref);
  const auto frames = load_frames(ref);
  const auto gts = load_gt(a.gt, static_cast<int>(frames.size()));
  DetectorModel geometry;
  if (a.threshold) geometry.score_threshold = *a.threshold;
  save_model(build_model(frames, gts, geometry, a.exemplars, a.mode), a.out);
  return 0;
}

struct DetectArgs {
  std::string manifest, model, out;
};

int cmd_detect(const DetectArgs& a) {
  const auto m = load_manifest(a.manifest);
  const auto model = load_model(a.model);
  const auto frames = load_frames(m);
  write_text(a.out, detections_csv(detect_or_empty(frames, model, Exec::parallel)));
  return 0;
}

struct EvalArgs {
  std::string detections, gt, manifest, curve_out, out;
  std::optional<int> frames;
};

int cmd_eval(const EvalArgs& a) {
  std::optional<SequenceManifest> m;
  if (!a.manifest.empty()) m = load_manifest(a.manifest);
  std::optional<int> frames = a.frames;
  if (m) frames = static_cast<int>(m->frame_paths.size());
  auto gts = load_gt(a.gt, frames);
  if (m) gts = gt_for(*m, std::move(gts));
  const auto dets = parse_detections_csv(csv::read_file(a.detections));

  EvalRecord rec;
  rec.sequence_id = m ? m->sequence_id : fs::path(a.detections).stem().string();
  rec.role = m ? m->role : SequenceRole::reference;
  if (m) rec.distortion = m->distortion;
  rec.frames = static_cast<int>(gts.size());
  for (const auto& f : gts) rec.gt_count += static_cast<int>(f.boxes.size());
  rec.result = evaluate(dets, gts);

  if (!a.curve_out.empty()) write_text(a.curve_out, curve_csv(rec.result.curve));
  const std::string text = eval_record_to_json(rec).dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  return 0;
}

struct StabilityArgs {
  std::string run_dir, ref_eval, stats, out, svg_out, detector_id = "hog-template";
  std::vector<std::string> evals;
  double omega = kDefaultOmega;
  double lambda = kDefaultLambda;
};

int cmd_stability(const StabilityArgs& a) {
  check_omega_lambda(a.omega, a.lambda);
  std::vector<EvalRecord> records;
  std::string stats_path = a.stats;
  if (!a.run_dir.empty()) {
    const fs::path eval_dir = fs::path(a.run_dir) / "eval";
    if (!fs::is_directory(eval_dir))
      throw ArgumentError(fmt::format("{} has no eval directory", a.run_dir));
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(eval_dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) records.push_back(eval_record_from_json(read_json(f)));
    if (stats_path.empty() && fs::exists(fs::path(a.run_dir) / "ladders" / "stats.csv"))
      stats_path = (fs::path(a.run_dir) / "ladders" / "stats.csv").string();
  } else {
    if (a.ref_eval.empty()) throw ArgumentError("give --run-dir or --ref-eval with --evals");
    records.push_back(eval_record_from_json(read_json(a.ref_eval)));
    for (const auto& e : a.evals) records.push_back(eval_record_from_json(read_json(e)));
  }

  const EvalRecord* ref = nullptr;
  std::vector<LevelOutcome> levels;
  for (const auto& r : records) {
    if (r.role == SequenceRole::reference) {
      if (ref) throw ArgumentError("more than one reference evaluation");
      ref = &r;
    } else {
      levels.push_back({r.sequence_id, *r.distortion, r.result.mr, r.result.accuracy});
    }
  }
  if (!ref) throw ArgumentError("no reference evaluation");
  if (levels.empty()) throw ArgumentError("no distorted evaluations");
  std::vector<LadderStatRow> stats;
  if (!stats_path.empty()) stats = parse_stats_csv(csv::read_file(stats_path));

  const auto report = report_with_time(make_report(a.detector_id, ref->sequence_id, ref->result.mr,
                                                   std::move(levels), std::move(stats), a.omega,
                                                   a.lambda));
  const std::string text = report_text(report);
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  if (!a.svg_out.empty()) write_quadrangle(report, a.lambda, a.svg_out);
  return 0;
}

struct ReportArgs {
  std::vector<std::string> reports;
  std::string out_dir;
  std::optional<double> lambda;
};

int cmd_report(const ReportArgs& a) {
  std::vector<RunReport> reports;
  for (const auto& p : a.reports) reports.push_back(report_from_json(read_json(p)));
  std::vector<std::pair<std::string, StabilityVector>> rows;
  for (const auto& r : reports) {
    for (const auto& row : rows)
      if (row.first == r.detector_id)
        throw ArgumentError(fmt::format("detector id {} appears in more than one report",
                                        r.detector_id));
    if (!r.stability)
      throw ArgumentError(fmt::format("report for {} lacks a full stability vector", r.detector_id));
    rows.emplace_back(r.detector_id, *r.stability);
  }
  const double lambda = a.lambda.value_or(reports.front().lambda);
  check_omega_lambda(0.0, lambda);
  const auto table = rank_by_stability(rows);
  for (auto kind : table.tie_broken)
    std::cout << "note: " << to_string(kind) << " ranking has ties, broken by detector id\n";

  std::vector<QuadrangleSpec> quads;
  for (const auto& r : reports) quads.push_back(*quad_of(r, lambda));
  ChartConfig cfg;
  cfg.lambda = lambda;
  fs::create_directories(a.out_dir);
  write_text(fs::path(a.out_dir) / "rankings.csv", ranking_csv(table));
  write_chart(quads, cfg, fs::path(a.out_dir) / "chart.svg");
  return 0;
}

struct RunArgs {
  std::string out, scene, ladder, kinds = "all", detector_id = "hog-template";
  std::optional<std::uint64_t> seed;
  int exemplars = 16;
  double omega = kDefaultOmega;
  double lambda = kDefaultLambda;
};

int cmd_run(const RunArgs& a) {
  check_omega_lambda(a.omega, a.lambda);
  const auto scene_cfg = scene_config(a.scene, std::nullopt);
  const fs::path out = a.out;
  const auto scene = synth_scene(scene_cfg);
  const auto ref = write_scene(scene, "scene", out / "reference");
  const auto model = build_model(scene.frames, scene.ground_truth, DetectorModel{}, a.exemplars);
  save_model(model, out / "model.json");

  RunOptions opt;
  opt.kinds = parse_kinds(a.kinds);
  opt.ladder = ladder_config(a.ladder, a.seed);
  opt.omega = a.omega;
  opt.lambda = a.lambda;
  opt.detector_id = a.detector_id;
  opt.on_sequence = [&](const EvalRecord& r, std::span<const Detection> dets) {
    write_text(out / "detections" / (r.sequence_id + ".csv"), detections_csv(dets));
    write_text(out / "eval" / (r.sequence_id + ".json"), eval_record_to_json(r).dump(2) + "\n");
    std::cerr << fmt::format("{:<24} A = {:.4f}\n", r.sequence_id, r.result.accuracy);
  };
  const auto report = report_with_time(
      robustness_run(scene.frames, scene.ground_truth, model, ref.sequence_id, opt));
  write_text(out / "ladders" / "stats.csv", stats_csv(report.ladder_stats));
  write_text(out / "report.json", report_text(report));
  if (report.stability) write_quadrangle(report, a.lambda, (out / "quadrangle.svg").string());
  if (report.stability)
    std::cout << fmt::format("a_ref {:.4f}  S = [qp {:.4f}, res {:.4f}, wn {:.4f}, bv {:.4f}]\n",
                             report.a_ref, report.stability->qp, report.stability->res,
                             report.stability->wn, report.stability->bv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness benchmarking of pedestrian detectors on distorted video"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic reference sequence");
  s->add_option("--config", synth.config, "Scene configuration JSON");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--id", synth.id, "Sequence id");
  s->add_option("--seed", synth.seed, "Texture seed (overrides the config)");

  DistortArgs distort;
  auto* d = app.add_subcommand("distort", "Build distortion ladders");
  d->add_option("--ref", distort.ref, "Reference manifest")->required();
  d->add_option("--out", distort.out, "Output directory")->required();
  d->add_option("--kinds", distort.kinds, "Comma-separated subset of qp,res,wn,bv");
  d->add_option("--config", distort.config, "Ladder configuration JSON");
  d->add_option("--seed", distort.seed, "Base noise seed");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Build a template model from exemplar crops");
  t->add_option("--ref", train.ref, "Reference manifest")->required();
  t->add_option("--gt", train.gt, "Ground-truth CSV")->required();
  t->add_option("--out", train.out, "Model JSON to write")->required();
  t->add_option("--exemplars", train.exemplars, "Number of exemplar crops")->check(CLI::PositiveNumber);
  t->add_option("--threshold", train.threshold, "Score threshold");
  t->add_option("--templates", train.mode, "mean: one averaged template; exemplars: one per crop")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, TemplateMode>{{"mean", TemplateMode::mean},
                                              {"exemplars", TemplateMode::exemplars}}));

  DetectArgs detect_args;
  auto* de = app.add_subcommand("detect", "Run the template detector");
  de->add_option("--manifest", detect_args.manifest, "Sequence manifest")->required();
  de->add_option("--model", detect_args.model, "Model JSON")->required();
  de->add_option("--out", detect_args.out, "Detections CSV to write")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score detections against ground truth");
  e->add_option("--detections", eval.detections, "Detections CSV")->required();
  e->add_option("--gt", eval.gt, "Ground-truth CSV")->required();
  e->add_option("--manifest", eval.manifest, "Manifest of the evaluated sequence");
  e->add_option("--frames", eval.frames, "Number of evaluated frames")->check(CLI::PositiveNumber);
  e->add_option("--curve-out", eval.curve_out, "Write the MR-FPPI curve CSV");
  e->add_option("--out", eval.out, "Write the result JSON here instead of stdout");

  StabilityArgs stab;
  auto* st = app.add_subcommand("stability", "Compute stability from evaluations");
  st->add_option("--run-dir", stab.run_dir, "Directory with eval/*.json");
  st->add_option("--ref-eval", stab.ref_eval, "Reference evaluation JSON");
  st->add_option("--evals", stab.evals, "Distorted evaluation JSONs");
  st->add_option("--stats", stab.stats, "Ladder stats CSV to embed");
  st->add_option("--detector-id", stab.detector_id, "Detector id");
  st->add_option("--omega", stab.omega, "Degradation weight in [0,1]");
  st->add_option("--lambda", stab.lambda, "Quadrangle centre scale");
  st->add_option("--out", stab.out, "Write the report here instead of stdout");
  st->add_option("--svg-out", stab.svg_out, "Write the quadrangle SVG");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Rank several run reports");
  r->add_option("--reports", rep.reports, "Run report JSONs")->required();
  r->add_option("--out-dir", rep.out_dir, "Output directory")->required();
  r->add_option("--lambda", rep.lambda, "Quadrangle centre scale (default: from the first report)");

  RunArgs run;
  auto* ru = app.add_subcommand("run", "End-to-end run of the reference detector");
  ru->add_option("--out", run.out, "Run directory")->required();
  ru->add_option("--scene", run.scene, "Scene configuration JSON");
  ru->add_option("--ladder", run.ladder, "Ladder configuration JSON");
  ru->add_option("--kinds", run.kinds, "Comma-separated subset of qp,res,wn,bv");
  ru->add_option("--seed", run.seed, "Base noise seed");
  ru->add_option("--exemplars", run.exemplars, "Number of exemplar crops")->check(CLI::PositiveNumber);
  ru->add_option("--detector-id", run.detector_id, "Detector id");
  ru->add_option("--omega", run.omega, "Degradation weight in [0,1]");
  ru->add_option("--lambda", run.lambda, "Quadrangle centre scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ExitCode::usage);
  }

  try {
    if (jobs > 0) set_thread_count(jobs);
    if (*s) return cmd_synth(synth);
    if (*d) return cmd_distort(distort);
    if (*t) return cmd_train(train);
    if (*de) return cmd_detect(detect_args);
    if (*e) return cmd_eval(eval);
    if (*st) return cmd_stability(stab);
    if (*r) return cmd_report(rep);
    if (*ru) return cmd_run(run);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ex.code());
  } catch (const nlohmann::json::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ExitCode::usage);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ExitCode::data);
  }
  return static_cast<int>(ExitCode::usage);
}

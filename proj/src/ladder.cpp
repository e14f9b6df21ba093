#include "robench/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "robench/csv.hpp"
#include "robench/dct_codec.hpp"
#include "robench/error.hpp"
#include "robench/netpbm.hpp"

namespace robench {

namespace fs = std::filesystem;
using nlohmann::json;

LadderConfig LadderConfig::defaults() {
  LadderConfig c;
  c.qp_levels = {10, 15, 20, 25, 30, 35, 40, 45, 50, 58, 65};
  // Constant step for the first seven levels, then finer steps down to 1/32.
  for (int k = 1; k <= 7; ++k) c.res_scales.push_back(1.0 - k / 8.0);
  for (double d : {12.0, 16.0, 24.0, 32.0}) c.res_scales.push_back(1.0 / d);
  for (int k = 0; k < 20; ++k) c.wn_sigmas.push_back(0.005 * std::pow(100.0, k / 19.0));
  c.wn_sigmas.back() = 0.5;
  c.bv_offsets = {-0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  return c;
}

void LadderConfig::validate() const {
  for (std::size_t i = 0; i < qp_levels.size(); ++i) {
    if (qp_levels[i] < kMinQp || qp_levels[i] > kMaxQp)
      throw ArgumentError(fmt::format("qp level {} outside [0,65]", qp_levels[i]));
    if (i > 0 && qp_levels[i] <= qp_levels[i - 1])
      throw ArgumentError("qp_levels must be strictly increasing");
  }
  for (std::size_t i = 0; i < res_scales.size(); ++i) {
    if (!(res_scales[i] > 0.0 && res_scales[i] <= 1.0))
      throw ArgumentError(fmt::format("resolution scale {} outside (0,1]", res_scales[i]));
    if (i > 0 && res_scales[i] >= res_scales[i - 1])
      throw ArgumentError("res_scales must be strictly decreasing");
  }
  for (std::size_t i = 0; i < wn_sigmas.size(); ++i) {
    if (!(wn_sigmas[i] > 0.0 && wn_sigmas[i] <= 1.0))
      throw ArgumentError(fmt::format("noise sigma {} outside (0,1]", wn_sigmas[i]));
    if (i > 0 && wn_sigmas[i] <= wn_sigmas[i - 1])
      throw ArgumentError("wn_sigmas must be strictly increasing");
  }
  for (std::size_t i = 0; i < bv_offsets.size(); ++i) {
    const double o = bv_offsets[i];
    if (!(o >= -1.0 && o <= 1.0) || o == 0.0)
      throw ArgumentError(fmt::format("brightness offset {} outside [-1,1] or zero", o));
    for (std::size_t j = 0; j < i; ++j)
      if (bv_offsets[j] == o) throw ArgumentError("bv_offsets must be distinct");
  }
}

std::size_t LadderConfig::size(DistortionKind kind) const {
  switch (kind) {
    case DistortionKind::qp: return qp_levels.size();
    case DistortionKind::res: return res_scales.size();
    case DistortionKind::wn: return wn_sigmas.size();
    case DistortionKind::bv: return bv_offsets.size();
  }
  return 0;
}

std::size_t LadderConfig::total() const {
  std::size_t n = 0;
  for (auto k : kAllKinds) n += size(k);
  return n;
}

json ladder_config_to_json(const LadderConfig& c) {
  return json{{"qp_levels", c.qp_levels},
              {"res_scales", c.res_scales},
              {"wn_sigmas", c.wn_sigmas},
              {"bv_offsets", c.bv_offsets},
              {"seed", c.seed}};
}

LadderConfig ladder_config_from_json(const json& j) {
  LadderConfig c = LadderConfig::defaults();
  try {
    if (j.contains("qp_levels")) c.qp_levels = j["qp_levels"].get<std::vector<int>>();
    if (j.contains("res_scales")) c.res_scales = j["res_scales"].get<std::vector<double>>();
    if (j.contains("wn_sigmas")) c.wn_sigmas = j["wn_sigmas"].get<std::vector<double>>();
    if (j.contains("bv_offsets")) c.bv_offsets = j["bv_offsets"].get<std::vector<double>>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("ladder config: {}", e.what()));
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(fmt::format("ladder config: {}", e.what()));
  }
  return c;
}

std::vector<DistortionSpec> ladder_specs(DistortionKind kind, const LadderConfig& config) {
  std::vector<DistortionSpec> specs;
  auto push = [&](double param) {
    DistortionSpec s{kind, static_cast<int>(specs.size()) + 1, param,
                     kind == DistortionKind::wn ? config.seed : 0};
    specs.push_back(s);
  };
  switch (kind) {
    case DistortionKind::qp:
      for (int qp : config.qp_levels) push(qp);
      break;
    case DistortionKind::res:
      for (double s : config.res_scales) push(s);
      break;
    case DistortionKind::wn:
      for (double s : config.wn_sigmas) push(s);
      break;
    case DistortionKind::bv:
      for (double o : config.bv_offsets) push(o);
      break;
  }
  return specs;
}

namespace {

std::uint64_t coded_size(std::span<const Image> frames, int qp, Exec exec) {
  std::uint64_t total = 0;
  for (const auto& f : frames) total += compress_dct(f, qp, exec).encoded_bytes;
  return total;
}

}  // namespace

DistortedSequence distort_sequence(std::span<const Image> frames, const DistortionSpec& spec,
                                   Exec exec) {
  spec.validate();
  DistortedSequence out{spec, std::vector<Image>(frames.size()), std::nullopt};
  // Frame-level parallelism; the per-frame kernels then run serially.
  if (spec.kind == DistortionKind::qp) {
    std::vector<std::uint64_t> bytes(frames.size());
    const int qp = static_cast<int>(spec.param);
    for_each_index(exec, static_cast<std::ptrdiff_t>(frames.size()), [&](std::ptrdiff_t i) {
      auto c = compress_dct(frames[static_cast<std::size_t>(i)], qp, Exec::serial);
      out.frames[static_cast<std::size_t>(i)] = std::move(c.image);
      bytes[static_cast<std::size_t>(i)] = c.encoded_bytes;
    });
    std::uint64_t total = 0;
    for (auto b : bytes) total += b;
    out.encoded_bytes = total;
    return out;
  }
  for_each_index(exec, static_cast<std::ptrdiff_t>(frames.size()), [&](std::ptrdiff_t i) {
    out.frames[static_cast<std::size_t>(i)] =
        apply_distortion(frames[static_cast<std::size_t>(i)], spec,
                         static_cast<std::uint64_t>(i), Exec::serial);
  });
  if (spec.kind == DistortionKind::res) out.encoded_bytes = coded_size(out.frames, kResolutionCodingQp, exec);
  return out;
}

QualityStats ladder_quality(std::span<const Image> ref, const DistortedSequence& dist) {
  if (ref.size() != dist.frames.size())
    throw SizeError(fmt::format("frame count mismatch: {} vs {}", ref.size(), dist.frames.size()));
  if (dist.spec.kind != DistortionKind::res || ref.empty() ||
      dist.frames.front().same_shape(ref.front()))
    return sequence_quality(ref, dist.frames, dist.encoded_bytes);

  std::vector<Image> expanded;
  expanded.reserve(dist.frames.size());
  for (const auto& f : dist.frames)
    expanded.push_back(upscale_nearest(f, ref.front().width(), ref.front().height()));
  QualityStats q = sequence_quality(ref, expanded, dist.encoded_bytes);
  double luma = 0.0;
  for (const auto& f : dist.frames) luma += mean_luma(f);
  q.mean_luma = luma / static_cast<double>(dist.frames.size());
  return q;
}

// ---------------------------------------------------------------------------
// External encoder hook

std::optional<EncoderHook> EncoderHook::from_env() {
  const char* v = std::getenv("ROBENCH_ENCODER_CMD");
  if (!v || !*v) return std::nullopt;
  return EncoderHook{v};
}

namespace {

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string EncoderHook::expand(const fs::path& in, const fs::path& out, const fs::path& dec,
                                int qp) const {
  std::string cmd = command_template;
  replace_all(cmd, "{in}", in.string());
  replace_all(cmd, "{out}", out.string());
  replace_all(cmd, "{dec}", dec.string());
  replace_all(cmd, "{qp}", std::to_string(qp));
  return cmd;
}

DistortedSequence EncoderHook::run(std::span<const Image> frames, const DistortionSpec& spec,
                                   const fs::path& work_dir) const {
  if (spec.kind != DistortionKind::qp) throw ArgumentError("encoder hook only handles qp");
  const int qp = static_cast<int>(spec.param);
  if (qp > 51)
    fmt::print(stderr, "warning: qp {} exceeds the H.264 maximum of 51 for the external encoder\n",
               qp);
  if (frames.empty()) throw ArgumentError("encoder hook: no frames");
  const PnmFormat format = format_for_channels(frames.front().channels());
  const fs::path in = work_dir / "in";
  const fs::path dec = work_dir / "dec";
  const fs::path out = work_dir / "encoded.bin";
  fs::create_directories(in);
  fs::create_directories(dec);
  for (std::size_t i = 0; i < frames.size(); ++i) save_frame(frames[i], in / frame_name(i, format), format);

  const std::string cmd = expand(in, out, dec, qp);
  const int rc = std::system(cmd.c_str());
  if (rc != 0) throw IoError(fmt::format("encoder command failed ({}): {}", rc, cmd));
  if (!fs::exists(out)) throw IoError(fmt::format("encoder did not write {}", out.string()));

  DistortedSequence result{spec, {}, fs::file_size(out)};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const fs::path p = dec / frame_name(i, format);
    if (!fs::exists(p)) throw IoError(fmt::format("encoder did not decode {}", p.string()));
    result.frames.push_back(load_frame(p, format));
  }
  fs::remove_all(in);
  return result;
}

// ---------------------------------------------------------------------------
// Ladder building

std::vector<SequenceManifest> build_ladder(const SequenceManifest& ref, DistortionKind kind,
                                           const LadderConfig& config, const fs::path& out_dir,
                                           const std::optional<EncoderHook>& hook, Exec exec) {
  ref.validate();
  if (ref.role != SequenceRole::reference)
    throw ConfigError(fmt::format("{} is not a reference sequence", ref.sequence_id));
  config.validate();
  const auto specs = ladder_specs(kind, config);
  if (specs.empty())
    throw ConfigError(fmt::format("ladder config has no {} levels", to_string(kind)));

  const auto frames = load_frames(ref);
  const PnmFormat format = format_for_channels(frames.front().channels());
  std::vector<SequenceManifest> manifests;
  for (const auto& spec : specs) {
    SequenceManifest m;
    m.sequence_id = fmt::format("{}_{}_{:02d}", ref.sequence_id, to_string(kind), spec.level);
    m.role = SequenceRole::distorted;
    m.distortion = spec;
    m.parent_id = ref.sequence_id;
    m.reference_size = std::pair{frames.front().width(), frames.front().height()};
    if (kind == DistortionKind::wn)
      m.seed_policy = fmt::format("frame i uses seed {} + i", spec.seed);

    const fs::path dir = out_dir / m.sequence_id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

    DistortedSequence d = (kind == DistortionKind::qp && hook)
                              ? hook->run(frames, spec, dir / "encoder")
                              : distort_sequence(frames, spec, exec);
    m.encoded_bytes = d.encoded_bytes;
    m.frame_paths.resize(d.frames.size());
    for_each_index(exec, static_cast<std::ptrdiff_t>(d.frames.size()), [&](std::ptrdiff_t i) {
      const auto idx = static_cast<std::size_t>(i);
      m.frame_paths[idx] = dir / frame_name(idx, format);
      save_frame(d.frames[idx], m.frame_paths[idx], format);
    });
    save_manifest(m, dir / "manifest.json");
    manifests.push_back(std::move(m));
  }
  return manifests;
}

// ---------------------------------------------------------------------------
// Statistics

LadderStatRow reference_stat_row(std::span<const Image> ref) {
  return {"ref", 0, 0.0, sequence_quality(ref, ref)};
}

LadderStatRow ladder_stat_row(std::span<const Image> ref, const DistortedSequence& dist) {
  return {std::string(to_string(dist.spec.kind)), dist.spec.level, dist.spec.param,
          ladder_quality(ref, dist)};
}

std::vector<LadderStatRow> ladder_stats(const SequenceManifest& ref,
                                        std::span<const SequenceManifest> ladders) {
  for (const auto& m : ladders)
    if (m.role != SequenceRole::distorted || !m.parent_id || *m.parent_id != ref.sequence_id)
      throw ConfigError(
          fmt::format("{} was not derived from {}", m.sequence_id, ref.sequence_id));

  const auto ref_frames = load_frames(ref);
  std::vector<LadderStatRow> rows{reference_stat_row(ref_frames)};
  for (const auto& m : ladders) {
    DistortedSequence d{*m.distortion, load_frames(m), m.encoded_bytes};
    rows.push_back(ladder_stat_row(ref_frames, d));
  }
  return rows;
}

std::string stats_csv(std::span<const LadderStatRow> rows) {
  std::string out =
      "kind,level,param,psnr_db,mean_luma,original_bytes,encoded_bytes,compression_ratio\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.kind, r.level, r.param,
                       format_db(r.stats.psnr_db), r.stats.mean_luma, r.stats.original_bytes,
                       r.stats.encoded_bytes, r.stats.compression_ratio);
  return out;
}

std::vector<LadderStatRow> parse_stats_csv(const std::string& text) {
  const auto t = csv::parse(text);
  const auto ck = t.column("kind"), cl = t.column("level"), cp = t.column("param"),
             cpsnr = t.column("psnr_db"), cm = t.column("mean_luma"),
             co = t.column("original_bytes"), ce = t.column("encoded_bytes"),
             cr = t.column("compression_ratio");
  std::vector<LadderStatRow> rows;
  for (const auto& f : t.rows) {
    LadderStatRow r;
    r.kind = f[ck];
    r.level = static_cast<int>(csv::to_int(f[cl]));
    r.param = csv::to_double(f[cp]);
    r.stats.psnr_db = csv::to_double(f[cpsnr]);
    r.stats.mean_luma = csv::to_double(f[cm]);
    r.stats.original_bytes = static_cast<std::uint64_t>(csv::to_int(f[co]));
    r.stats.encoded_bytes = static_cast<std::uint64_t>(csv::to_int(f[ce]));
    r.stats.compression_ratio = csv::to_double(f[cr]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace robench

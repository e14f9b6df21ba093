#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "robench/distortion.hpp"
#include "robench/manifest.hpp"
#include "robench/quality.hpp"

namespace robench {

/// Level grids of the four ladders. Order within each list is the level order
/// (level 1 first).
struct LadderConfig {
  std::vector<int> qp_levels;        // strictly increasing
  std::vector<double> res_scales;    // strictly decreasing
  std::vector<double> wn_sigmas;     // strictly increasing
  std::vector<double> bv_offsets;    // no zero
  std::uint64_t seed = 20180101;     // base noise seed; frame i uses seed + i

  /// 11 QPs from 10 to 65, 11 scales down to 1/32, 20 log-spaced sigmas from
  /// 0.005 to 0.5 and 4 darker + 6 brighter offsets: 52 versions in total.
  static LadderConfig defaults();

  /// Throws ArgumentError on a violated ordering or range invariant.
  void validate() const;
  std::size_t size(DistortionKind kind) const;
  std::size_t total() const;
};

nlohmann::json ladder_config_to_json(const LadderConfig& c);
/// Missing lists fall back to the defaults.
LadderConfig ladder_config_from_json(const nlohmann::json& j);

/// Specs of every level of one ladder, in level order.
std::vector<DistortionSpec> ladder_specs(DistortionKind kind, const LadderConfig& config);

/// QP used to code reduced-resolution frames when reporting their size.
inline constexpr int kResolutionCodingQp = 4;

/// A distorted version held in memory. `encoded_bytes` is set for qp (codec
/// output) and res (frames coded at kResolutionCodingQp).
struct DistortedSequence {
  DistortionSpec spec;
  std::vector<Image> frames;
  std::optional<std::uint64_t> encoded_bytes;
};

/// Applies `spec` to every frame. Frames are processed concurrently with the
/// parallel policy; results are stored by frame index.
DistortedSequence distort_sequence(std::span<const Image> frames, const DistortionSpec& spec,
                                   Exec exec = Exec::parallel);

/// Quality of a distorted version against the reference frames. Reduced
/// resolution frames are compared after pixel replication back to full size.
QualityStats ladder_quality(std::span<const Image> ref, const DistortedSequence& dist);

/// External H.264 (or any codec) hook. The template may use {in} (directory of
/// input frames named frame_00000.pgm ...), {out} (encoded file to write),
/// {dec} (directory to receive decoded frames under the same names) and {qp}.
struct EncoderHook {
  std::string command_template;

  /// Reads ROBENCH_ENCODER_CMD; nullopt when unset or empty.
  static std::optional<EncoderHook> from_env();

  std::string expand(const std::filesystem::path& in, const std::filesystem::path& out,
                     const std::filesystem::path& dec, int qp) const;

  /// Runs the command in `work_dir` and returns the decoded frames with the
  /// size of the encoded file. Warns on stderr for qp > 51.
  DistortedSequence run(std::span<const Image> frames, const DistortionSpec& spec,
                        const std::filesystem::path& work_dir) const;
};

/// Writes one distorted sequence per level of `kind` under out_dir/<id>/,
/// where id = <ref id>_<kind>_<level, two digits>, and returns the manifests
/// in level order. With `hook` set the qp ladder uses it instead of the
/// block-DCT surrogate.
std::vector<SequenceManifest> build_ladder(const SequenceManifest& ref, DistortionKind kind,
                                           const LadderConfig& config,
                                           const std::filesystem::path& out_dir,
                                           const std::optional<EncoderHook>& hook = std::nullopt,
                                           Exec exec = Exec::parallel);

struct LadderStatRow {
  std::string kind;  // "ref" for the reference row
  int level = 0;
  double param = 0.0;
  QualityStats stats;
};

/// Reference row (level 0, psnr inf, ratio 1) followed by one row per
/// distorted manifest. Throws ConfigError when a manifest's parent is not
/// `ref`.
std::vector<LadderStatRow> ladder_stats(const SequenceManifest& ref,
                                        std::span<const SequenceManifest> ladders);

/// In-memory form used by the robustness pipeline.
LadderStatRow ladder_stat_row(std::span<const Image> ref, const DistortedSequence& dist);
LadderStatRow reference_stat_row(std::span<const Image> ref);

/// CSV with header kind,level,param,psnr_db,mean_luma,original_bytes,encoded_bytes,compression_ratio
std::string stats_csv(std::span<const LadderStatRow> rows);
std::vector<LadderStatRow> parse_stats_csv(const std::string& text);

}  // namespace robench

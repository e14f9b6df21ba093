#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "robench/distortion.hpp"
#include "robench/image.hpp"
#include "robench/quality.hpp"

namespace robench {

enum class SequenceRole { reference, distorted };

/// Names one version of a reference sequence: its frames on disk and, for
/// distorted versions, how they were produced.
struct SequenceManifest {
  std::string sequence_id;
  SequenceRole role = SequenceRole::reference;
  /// Absolute or relative to the working directory once loaded; written
  /// relative to the manifest's own directory.
  std::vector<std::filesystem::path> frame_paths;
  std::optional<DistortionSpec> distortion;
  std::optional<std::string> parent_id;
  /// Coded size of the sequence when a codec produced it.
  std::optional<std::uint64_t> encoded_bytes;
  /// Free-form note on how noise seeds were derived.
  std::optional<std::string> seed_policy;
  /// Frame size of the reference a distorted version was made from; lets
  /// ground truth be mapped onto reduced-resolution frames.
  std::optional<std::pair<int, int>> reference_size;

  /// Throws ConfigError on a violated manifest invariant.
  void validate() const;
};

nlohmann::json distortion_to_json(const DistortionSpec& spec);
DistortionSpec distortion_from_json(const nlohmann::json& j);

/// `base` is the directory frame paths are made relative to (or resolved against).
nlohmann::json manifest_to_json(const SequenceManifest& m, const std::filesystem::path& base);
SequenceManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base);

SequenceManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const SequenceManifest& m, const std::filesystem::path& path);

/// Loads every frame; throws SizeError when frames disagree in shape.
std::vector<Image> load_frames(const SequenceManifest& m);

/// Pooled-MSE PSNR, mean luma and byte sizes of `dist` against `ref`. The
/// encoded size comes from the distorted manifest when recorded, else from
/// the raw frame size.
QualityStats sequence_psnr(const SequenceManifest& ref, const SequenceManifest& dist);

}  // namespace robench

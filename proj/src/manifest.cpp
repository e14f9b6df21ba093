#include "robench/manifest.hpp"

#include <fstream>

#include <fmt/format.h>

#include "robench/error.hpp"
#include "robench/netpbm.hpp"

namespace robench {

namespace fs = std::filesystem;
using nlohmann::json;

void SequenceManifest::validate() const {
  if (sequence_id.empty()) throw ConfigError("manifest: empty sequence_id");
  if (frame_paths.empty()) throw ConfigError(fmt::format("manifest {}: no frames", sequence_id));
  if (role == SequenceRole::distorted) {
    if (!distortion)
      throw ConfigError(fmt::format("manifest {}: distorted sequence without distortion",
                                    sequence_id));
    if (!parent_id || parent_id->empty())
      throw ConfigError(fmt::format("manifest {}: distorted sequence without parent_id",
                                    sequence_id));
    try {
      distortion->validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(fmt::format("manifest {}: {}", sequence_id, e.what()));
    }
  }
}

json distortion_to_json(const DistortionSpec& spec) {
  return json{{"type", std::string(to_string(spec.kind))},
              {"level", spec.level},
              {"param", spec.param},
              {"seed", spec.seed}};
}

DistortionSpec distortion_from_json(const json& j) {
  try {
    DistortionSpec s;
    s.kind = parse_kind(j.at("type").get<std::string>());
    s.level = j.at("level").get<int>();
    s.param = j.at("param").get<double>();
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("distortion record: {}", e.what()));
  } catch (const ArgumentError& e) {
    throw ConfigError(fmt::format("distortion record: {}", e.what()));
  }
}

json manifest_to_json(const SequenceManifest& m, const fs::path& base) {
  json paths = json::array();
  for (const auto& p : m.frame_paths) {
    fs::path rel = base.empty() ? p : p.lexically_relative(base);
    if (rel.empty()) rel = p;
    paths.push_back(rel.generic_string());
  }
  json j{{"sequence_id", m.sequence_id},
         {"role", m.role == SequenceRole::reference ? "reference" : "distorted"},
         {"frame_paths", std::move(paths)}};
  if (m.distortion) j["distortion"] = distortion_to_json(*m.distortion);
  if (m.parent_id) j["parent_id"] = *m.parent_id;
  if (m.encoded_bytes) j["encoded_bytes"] = *m.encoded_bytes;
  if (m.seed_policy) j["seed_policy"] = *m.seed_policy;
  if (m.reference_size) j["reference_size"] = {m.reference_size->first, m.reference_size->second};
  return j;
}

SequenceManifest manifest_from_json(const json& j, const fs::path& base) {
  SequenceManifest m;
  try {
    m.sequence_id = j.at("sequence_id").get<std::string>();
    const auto role = j.at("role").get<std::string>();
    if (role == "reference")
      m.role = SequenceRole::reference;
    else if (role == "distorted")
      m.role = SequenceRole::distorted;
    else
      throw ConfigError(fmt::format("manifest: unknown role '{}'", role));
    for (const auto& p : j.at("frame_paths")) {
      fs::path path = p.get<std::string>();
      m.frame_paths.push_back(path.is_relative() ? base / path : path);
    }
    if (j.contains("distortion") && !j["distortion"].is_null())
      m.distortion = distortion_from_json(j["distortion"]);
    if (j.contains("parent_id") && !j["parent_id"].is_null())
      m.parent_id = j["parent_id"].get<std::string>();
    if (j.contains("encoded_bytes")) m.encoded_bytes = j["encoded_bytes"].get<std::uint64_t>();
    if (j.contains("seed_policy")) m.seed_policy = j["seed_policy"].get<std::string>();
    if (j.contains("reference_size"))
      m.reference_size = std::pair{j["reference_size"].at(0).get<int>(),
                                   j["reference_size"].at(1).get<int>()};
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("manifest: {}", e.what()));
  }
  m.validate();
  return m;
}

SequenceManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open manifest {}", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("manifest {}: {}", path.string(), e.what()));
  }
  return manifest_from_json(j, path.parent_path());
}

void save_manifest(const SequenceManifest& m, const fs::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write manifest {}", path.string()));
  out << manifest_to_json(m, path.parent_path()).dump(2) << '\n';
}

std::vector<Image> load_frames(const SequenceManifest& m) {
  std::vector<Image> frames;
  frames.reserve(m.frame_paths.size());
  for (const auto& p : m.frame_paths) {
    frames.push_back(load_frame(p));
    if (!frames.back().same_shape(frames.front()))
      throw SizeError(fmt::format("sequence {}: frame {} differs in shape from frame 0",
                                  m.sequence_id, p.string()));
  }
  return frames;
}

QualityStats sequence_psnr(const SequenceManifest& ref, const SequenceManifest& dist) {
  if (ref.frame_paths.size() != dist.frame_paths.size())
    throw SizeError(fmt::format("frame count mismatch: {} has {}, {} has {}", ref.sequence_id,
                                ref.frame_paths.size(), dist.sequence_id,
                                dist.frame_paths.size()));
  const auto a = load_frames(ref);
  const auto b = load_frames(dist);
  return sequence_quality(a, b, dist.encoded_bytes);
}

}  // namespace robench

#include "robench/stability.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "robench/error.hpp"

namespace robench {

namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ArgumentError(fmt::format("{} must be in [0,1], got {}", what, v));
}

double relative_penalty(double value, double base) {
  if (base == 0.0) return value == 0.0 ? 0.0 : 1.0;
  const double r = (value - base) / base;
  return std::min(1.0, r * r);
}

}  // namespace

std::size_t LadderAccuracies::n_x() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.size();
  return n;
}

void LadderAccuracies::validate() const {
  const std::size_t want = kind == DistortionKind::bv ? 2 : 1;
  if (chains.size() != want)
    throw ArgumentError(fmt::format("{} ladder needs {} chain(s), got {}", to_string(kind), want,
                                    chains.size()));
  if (n_x() == 0) throw ArgumentError(fmt::format("{} ladder is empty", to_string(kind)));
  check_unit(a_ref, "reference accuracy");
  for (const auto& c : chains)
    for (const auto& e : c) check_unit(e.accuracy, "accuracy");
}

double degradation_penalty(double a_i, double a_ref) {
  check_unit(a_i, "accuracy");
  check_unit(a_ref, "reference accuracy");
  return relative_penalty(a_i, a_ref);
}

double monotonicity_penalty(double a_i, double a_prev) {
  check_unit(a_i, "accuracy");
  check_unit(a_prev, "previous accuracy");
  if (a_i <= a_prev) return 0.0;
  return relative_penalty(a_i, a_prev);
}

LadderAccuracies order_ladder(DistortionKind kind, double a_ref,
                              std::span<const LadderEntry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (entries[i].param == entries[j].param)
        throw ArgumentError(fmt::format("duplicate {} parameter {}", to_string(kind),
                                        entries[i].param));

  LadderAccuracies out{kind, a_ref, {}};
  std::vector<LadderEntry> all(entries.begin(), entries.end());
  switch (kind) {
    case DistortionKind::qp:
    case DistortionKind::wn:
      std::stable_sort(all.begin(), all.end(),
                       [](const auto& a, const auto& b) { return a.param < b.param; });
      out.chains.push_back(std::move(all));
      break;
    case DistortionKind::res:
      std::stable_sort(all.begin(), all.end(),
                       [](const auto& a, const auto& b) { return a.param > b.param; });
      out.chains.push_back(std::move(all));
      break;
    case DistortionKind::bv: {
      std::vector<LadderEntry> low, high;
      for (const auto& e : all) {
        if (e.param == 0.0) throw ArgumentError("brightness offset 0 is the reference");
        (e.param < 0.0 ? low : high).push_back(e);
      }
      auto by_magnitude = [](const auto& a, const auto& b) {
        return std::abs(a.param) < std::abs(b.param);
      };
      std::stable_sort(low.begin(), low.end(), by_magnitude);
      std::stable_sort(high.begin(), high.end(), by_magnitude);
      out.chains.push_back(std::move(low));
      out.chains.push_back(std::move(high));
      break;
    }
  }
  return out;
}

StabilityResult stability(const LadderAccuracies& ladder, double omega) {
  check_unit(omega, "omega");
  ladder.validate();
  StabilityResult r;
  r.breakdown.omega = omega;
  double sum = 0.0;
  for (const auto& chain : ladder.chains) {
    double prev = ladder.a_ref;
    for (const auto& e : chain) {
      LevelPenalty p{e.level, e.param, e.accuracy, degradation_penalty(e.accuracy, ladder.a_ref),
                     monotonicity_penalty(e.accuracy, prev)};
      sum += omega * p.pd + (1.0 - omega) * p.pm;
      r.breakdown.levels.push_back(p);
      prev = e.accuracy;
    }
  }
  r.s = 1.0 - std::sqrt(sum / static_cast<double>(ladder.n_x()));
  return r;
}

double StabilityVector::operator[](DistortionKind kind) const {
  switch (kind) {
    case DistortionKind::qp: return qp;
    case DistortionKind::res: return res;
    case DistortionKind::wn: return wn;
    case DistortionKind::bv: return bv;
  }
  return 0.0;
}

double& StabilityVector::operator[](DistortionKind kind) {
  switch (kind) {
    case DistortionKind::qp: return qp;
    case DistortionKind::res: return res;
    case DistortionKind::wn: return wn;
    case DistortionKind::bv: break;
  }
  return bv;
}

StabilityVector stability_vector(std::span<const LadderAccuracies> ladders, double omega) {
  StabilityVector v;
  bool seen[4] = {false, false, false, false};
  for (const auto& l : ladders) {
    const auto k = static_cast<std::size_t>(l.kind);
    if (seen[k]) throw ArgumentError(fmt::format("duplicate {} ladder", to_string(l.kind)));
    seen[k] = true;
    v[l.kind] = stability(l, omega).s;
  }
  for (auto k : kAllKinds)
    if (!seen[static_cast<std::size_t>(k)])
      throw ArgumentError(fmt::format("missing {} ladder", to_string(k)));
  return v;
}

nlohmann::json stability_report_json(const std::string& detector_id,
                                     std::span<const LadderAccuracies> ladders, double omega) {
  nlohmann::json per_kind = nlohmann::json::object();
  double a_ref = ladders.empty() ? 0.0 : ladders.front().a_ref;
  for (const auto& l : ladders) {
    const auto r = stability(l, omega);
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& p : r.breakdown.levels)
      levels.push_back(
          {{"level", p.level}, {"param", p.param}, {"a", p.accuracy}, {"pd", p.pd}, {"pm", p.pm}});
    per_kind[std::string(to_string(l.kind))] = {{"s", r.s}, {"levels", std::move(levels)}};
  }
  return {{"detector_id", detector_id}, {"a_ref", a_ref}, {"omega", omega},
          {"per_kind", std::move(per_kind)}};
}

std::vector<LadderAccuracies> ladders_from_report_json(const nlohmann::json& j) {
  std::vector<LadderAccuracies> out;
  try {
    const double a_ref = j.at("a_ref").get<double>();
    for (auto kind : kAllKinds) {
      const auto name = std::string(to_string(kind));
      if (!j.at("per_kind").contains(name)) continue;
      std::vector<LadderEntry> entries;
      for (const auto& lv : j["per_kind"][name].at("levels"))
        entries.push_back({lv.at("level").get<int>(), lv.at("param").get<double>(),
                           lv.at("a").get<double>()});
      out.push_back(order_ladder(kind, a_ref, entries));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("stability report: {}", e.what()));
  }
  return out;
}

}  // namespace robench

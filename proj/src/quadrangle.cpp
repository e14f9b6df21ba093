#include "robench/quadrangle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "robench/csv.hpp"
#include "robench/error.hpp"

namespace robench {

QuadrangleSpec quadrangle(std::string detector_id, double a_ref, const StabilityVector& s,
                          double lambda, double half_width) {
  if (!(a_ref >= 0.0 && a_ref <= 1.0))
    throw ArgumentError(fmt::format("a_ref must be in [0,1], got {}", a_ref));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ArgumentError(fmt::format("lambda must be >= 0, got {}", lambda));
  if (!(half_width > 0.0))
    throw ArgumentError(fmt::format("half width must be > 0, got {}", half_width));
  for (auto k : kAllKinds)
    if (!(s[k] >= 0.0 && s[k] <= 1.0))
      throw ArgumentError(fmt::format("stability {} must be in [0,1], got {}", to_string(k), s[k]));

  QuadrangleSpec q{std::move(detector_id), a_ref, s, lambda, half_width, lambda * a_ref, {}};
  q.vertices = {Point{q.cx - half_width, s.qp}, Point{q.cx + half_width, s.res},
                Point{q.cx + half_width, s.wn}, Point{q.cx - half_width, s.bv}};
  return q;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr double kViewW = 1000.0;
constexpr double kViewH = 600.0;
constexpr double kPlotLeft = 80.0;
constexpr double kPlotRight = 800.0;
constexpr double kPlotTop = 50.0;
constexpr double kPlotBottom = 540.0;

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f"};

struct Axes {
  double x_min, x_max, y_min, y_max;

  double px(double x) const {
    return kPlotLeft + (x - x_min) / (x_max - x_min) * (kPlotRight - kPlotLeft);
  }
  double py(double y) const {
    return kPlotBottom - (y - y_min) / (y_max - y_min) * (kPlotBottom - kPlotTop);
  }
  double ux(double px) const {
    return x_min + (px - kPlotLeft) / (kPlotRight - kPlotLeft) * (x_max - x_min);
  }
  double uy(double py) const {
    return y_min + (kPlotBottom - py) / (kPlotBottom - kPlotTop) * (y_max - y_min);
  }
};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string xml_unescape(std::string s) {
  const std::pair<const char*, const char*> table[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&amp;", "&"}};
  for (const auto& [from, to] : table) {
    std::size_t pos = 0;
    const std::string_view f(from);
    while ((pos = s.find(f, pos)) != std::string::npos) {
      s.replace(pos, f.size(), to);
      pos += 1;
    }
  }
  return s;
}

std::string points_attr(const Axes& ax, const std::array<Point, 4>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt::format("{:.6f},{:.6f}", ax.px(v[i].x), ax.py(v[i].y));
  }
  return out;
}

Axes choose_axes(std::span<const QuadrangleSpec> quads, const ChartConfig& cfg) {
  Axes ax{0.0, 1.0, cfg.y_range.first, cfg.y_range.second};
  if (cfg.x_range) {
    ax.x_min = cfg.x_range->first;
    ax.x_max = cfg.x_range->second;
  } else {
    double lo = 0.0, hi = 0.0;
    for (const auto& q : quads) {
      lo = std::min(lo, q.cx - q.half_width);
      hi = std::max(hi, q.cx + q.half_width);
    }
    if (cfg.show_ideal) {
      const double hw = quads.empty() ? kDefaultHalfWidth : quads.front().half_width;
      lo = std::min(lo, cfg.lambda - hw);
      hi = std::max(hi, cfg.lambda + hw);
    }
    const double pad = 0.05 * (hi - lo) + 0.05;
    ax.x_min = lo - pad;
    ax.x_max = hi + pad;
  }
  if (!(ax.x_max > ax.x_min)) throw ArgumentError("chart x range is empty");
  if (!(ax.y_min <= 0.0 && ax.y_max >= 1.0)) throw ArgumentError("chart y range must cover [0,1]");
  return ax;
}

}  // namespace

std::string render_chart(std::span<const QuadrangleSpec> quads, const ChartConfig& cfg) {
  if (quads.empty()) throw ArgumentError("chart needs at least one quadrangle");
  const Axes ax = choose_axes(quads, cfg);

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" data-x-min=\"{2}\" data-x-max=\"{3}\" data-y-min=\"{4}\" "
      "data-y-max=\"{5}\" data-lambda=\"{6}\">\n",
      kViewW, kViewH, ax.x_min, ax.x_max, ax.y_min, ax.y_max, cfg.lambda);
  svg += "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"600\" fill=\"white\"/>\n";
  svg += fmt::format(
      "<text x=\"{}\" y=\"30\" font-family=\"sans-serif\" font-size=\"18\" "
      "text-anchor=\"middle\">{}</text>\n",
      (kPlotLeft + kPlotRight) / 2, xml_escape(cfg.title));

  // Axes frame and ticks.
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      kPlotLeft, kPlotTop, kPlotRight - kPlotLeft, kPlotBottom - kPlotTop);
  for (int i = 0; i <= 5; ++i) {
    const double y = i / 5.0;
    if (y < ax.y_min || y > ax.y_max) continue;
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.3f}\" x2=\"{2}\" y2=\"{1:.3f}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{3}\" y=\"{4:.3f}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"end\">{5:.1f}</text>\n",
        kPlotLeft, ax.py(y), kPlotRight, kPlotLeft - 6, ax.py(y) + 4, y);
  }
  for (int i = 0; i <= 5; ++i) {
    const double x = ax.x_min + (ax.x_max - ax.x_min) * i / 5.0;
    svg += fmt::format(
        "<line x1=\"{0:.3f}\" y1=\"{1}\" x2=\"{0:.3f}\" y2=\"{2}\" stroke=\"black\"/>\n"
        "<text x=\"{0:.3f}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\">{4:.2f}</text>\n",
        ax.px(x), kPlotBottom, kPlotBottom + 5, kPlotBottom + 20, x);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" "
      "text-anchor=\"middle\">A_ref x lambda (lambda = {})</text>\n",
      (kPlotLeft + kPlotRight) / 2, kPlotBottom + 45, cfg.lambda);
  svg += fmt::format(
      "<text x=\"20\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"14\" "
      "text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">Stability</text>\n",
      (kPlotTop + kPlotBottom) / 2);

  if (cfg.show_ideal) {
    const double hw = quads.front().half_width;
    const std::array<Point, 4> v = {Point{cfg.lambda - hw, 1.0}, Point{cfg.lambda + hw, 1.0},
                                    Point{cfg.lambda + hw, 1.0}, Point{cfg.lambda - hw, 1.0}};
    svg += fmt::format(
        "<polygon class=\"ideal\" data-detector=\"ideal\" data-a-ref=\"1\" data-cx=\"{}\" "
        "points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" "
        "stroke-dasharray=\"6,4\"/>\n",
        cfg.lambda, points_attr(ax, v));
  }

  for (std::size_t i = 0; i < quads.size(); ++i) {
    const auto& q = quads[i];
    const char* color = kPalette[i % std::size(kPalette)];
    svg += fmt::format(
        "<polygon class=\"quad\" data-detector=\"{}\" data-a-ref=\"{}\" data-lambda=\"{}\" "
        "data-cx=\"{}\" data-s-qp=\"{}\" data-s-res=\"{}\" data-s-wn=\"{}\" data-s-bv=\"{}\" "
        "points=\"{}\" fill=\"{}\" fill-opacity=\"0.08\" stroke=\"{}\" stroke-width=\"2\"/>\n",
        xml_escape(q.detector_id), q.a_ref, q.lambda, q.cx, q.s.qp, q.s.res, q.s.wn, q.s.bv,
        points_attr(ax, q.vertices), color, color);
  }

  // Legend
  double ly = kPlotTop + 10;
  for (std::size_t i = 0; i < quads.size(); ++i, ly += 22) {
    const char* color = kPalette[i % std::size(kPalette)];
    const std::string& label =
        i < cfg.legend_labels.size() ? cfg.legend_labels[i] : quads[i].detector_id;
    svg += fmt::format(
        "<line x1=\"815\" y1=\"{0}\" x2=\"845\" y2=\"{0}\" stroke=\"{1}\" stroke-width=\"3\"/>\n"
        "<text x=\"852\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"13\">{3}</text>\n",
        ly, color, ly + 4, xml_escape(label));
  }
  if (cfg.show_ideal)
    svg += fmt::format(
        "<line x1=\"815\" y1=\"{0}\" x2=\"845\" y2=\"{0}\" stroke=\"#d62728\" stroke-width=\"2\" "
        "stroke-dasharray=\"6,4\"/>\n"
        "<text x=\"852\" y=\"{1}\" font-family=\"sans-serif\" font-size=\"13\">ideal</text>\n",
        ly, ly + 4);
  svg += "</svg>\n";
  return svg;
}

void write_chart(std::span<const QuadrangleSpec> quads, const ChartConfig& cfg,
                 const std::filesystem::path& path) {
  const std::string svg = render_chart(quads, cfg);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write chart {}", path.string()));
  out << svg;
  if (!out) throw IoError(fmt::format("short write to {}", path.string()));
}

// ---------------------------------------------------------------------------
// Parse-back

namespace {

std::map<std::string, std::string> attributes(const std::string& tag) {
  static const std::regex attr_re(R"re(([A-Za-z_:][-A-Za-z0-9_:.]*)="([^"]*)")re");
  std::map<std::string, std::string> attrs;
  for (auto it = std::sregex_iterator(tag.begin(), tag.end(), attr_re);
       it != std::sregex_iterator(); ++it)
    attrs[(*it)[1].str()] = xml_unescape((*it)[2].str());
  return attrs;
}

double attr_number(const std::map<std::string, std::string>& attrs, const std::string& key) {
  const auto it = attrs.find(key);
  if (it == attrs.end()) throw FormatError(fmt::format("chart: missing attribute {}", key));
  return csv::to_double(it->second);
}

}  // namespace

std::vector<ParsedQuadrangle> parse_chart(const std::string& svg) {
  const auto root_begin = svg.find("<svg");
  if (root_begin == std::string::npos) throw FormatError("chart: no <svg> element");
  const auto root = attributes(svg.substr(root_begin, svg.find('>', root_begin) - root_begin));
  const Axes ax{attr_number(root, "data-x-min"), attr_number(root, "data-x-max"),
                attr_number(root, "data-y-min"), attr_number(root, "data-y-max")};

  std::vector<ParsedQuadrangle> out;
  std::size_t pos = 0;
  while ((pos = svg.find("<polygon", pos)) != std::string::npos) {
    const auto end = svg.find('>', pos);
    const auto attrs = attributes(svg.substr(pos, end - pos));
    pos = end;
    ParsedQuadrangle q;
    q.detector_id = attrs.count("data-detector") ? attrs.at("data-detector") : "";
    q.ideal = attrs.count("class") && attrs.at("class") == "ideal";
    const auto pts = attrs.count("points") ? attrs.at("points") : "";
    std::size_t i = 0, p = 0;
    while (i < 4) {
      const auto comma = pts.find(',', p);
      const auto space = pts.find(' ', comma);
      if (comma == std::string::npos) break;
      const double px = csv::to_double(std::string_view(pts).substr(p, comma - p));
      const double py = csv::to_double(
          std::string_view(pts).substr(comma + 1, (space == std::string::npos ? pts.size() : space) - comma - 1));
      q.vertices[i++] = {ax.ux(px), ax.uy(py)};
      if (space == std::string::npos) break;
      p = space + 1;
    }
    if (i != 4) throw FormatError("chart: polygon without four vertices");
    q.cx = (q.vertices[0].x + q.vertices[1].x) / 2.0;
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rankings

RankingTable rank_by_stability(
    std::span<const std::pair<std::string, StabilityVector>> results) {
  RankingTable table;
  for (auto kind : kAllKinds) {
    std::vector<RankEntry> rows;
    for (const auto& [id, s] : results) rows.push_back({0, id, s[kind]});
    std::sort(rows.begin(), rows.end(), [](const RankEntry& a, const RankEntry& b) {
      if (a.s_value != b.s_value) return a.s_value > b.s_value;
      return a.detector_id < b.detector_id;
    });
    bool tie = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].rank = static_cast<int>(i) + 1;
      if (i > 0 && rows[i].s_value == rows[i - 1].s_value) tie = true;
    }
    if (tie) table.tie_broken.push_back(kind);
    table.per_kind[static_cast<std::size_t>(kind)] = std::move(rows);
  }
  return table;
}

std::string ranking_csv(const RankingTable& table) {
  std::string out = "kind,rank,detector_id,s_value\n";
  for (auto kind : kAllKinds)
    for (const auto& r : table.per_kind[static_cast<std::size_t>(kind)])
      out += fmt::format("{},{},{},{}\n", to_string(kind), r.rank, r.detector_id, r.s_value);
  return out;
}

}  // namespace robench

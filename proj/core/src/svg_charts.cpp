#include "cwpor/svg_charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <vector>

#include "cwpor/error.hpp"

namespace cwpor {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr std::size_t kPaletteSize = std::size(kPalette);

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Point {
  double x;
  double y;
};

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void rect(std::string_view cls, double x, double y, double w, double h, std::string_view fill) {
    body_ += "<rect class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + std::string(fill) + "\"/>\n";
  }

  void line(std::string_view cls, double x1, double y1, double x2, double y2, std::string_view stroke,
            std::string_view extra = {}) {
    body_ += "<line class=\"" + std::string(cls) + "\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
             "\" y2=\"" + num(y2) + "\" stroke=\"" + std::string(stroke) + "\"" + std::string(extra) + "/>\n";
  }

  void polyline(std::string_view cls, const std::vector<Point>& pts, std::string_view stroke, std::string_view extra = {}) {
    body_ += "<polyline class=\"" + std::string(cls) + "\" fill=\"none\" stroke=\"" + std::string(stroke) +
             "\" stroke-width=\"2\"" + std::string(extra) + " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ += ' ';
      body_ += num(pts[i].x) + "," + num(pts[i].y);
    }
    body_ += "\"/>\n";
  }

  void circle(std::string_view cls, Point p, double r, std::string_view fill) {
    body_ += "<circle class=\"" + std::string(cls) + "\" cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" + num(r) +
             "\" fill=\"" + std::string(fill) + "\"/>\n";
  }

  void text(double x, double y, std::string_view s, std::string_view anchor = "middle", double rotate = 0.0,
            int size = 11) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
             "\" text-anchor=\"" + std::string(anchor) + "\"";
    if (rotate != 0.0) body_ += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
    body_ += ">" + xml_escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\" font-family=\"sans-serif\">\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) + "\" fill=\"#ffffff\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  double width_;
  double height_;
  std::string body_;
};

// Plot area with a [0, y_max] vertical scale.
struct Frame {
  double left, top, width, height;
  double y_max = 1.0;

  double y(double v) const { return top + height * (1.0 - v / y_max); }
  double bottom() const { return top + height; }
  double right() const { return left + width; }
};

void left_axis(Svg& svg, const Frame& f, std::string_view label) {
  svg.line("axis", f.left, f.top, f.left, f.bottom(), "#000000");
  svg.line("axis", f.left, f.bottom(), f.right(), f.bottom(), "#000000");
  for (int i = 0; i <= 5; ++i) {
    const double v = f.y_max * i / 5.0;
    svg.line("tick", f.left - 4, f.y(v), f.left, f.y(v), "#000000");
    svg.text(f.left - 6, f.y(v) + 4, num(v), "end");
  }
  svg.text(f.left - 42, f.top + f.height / 2, label, "middle", -90.0);
}

void right_axis(Svg& svg, const Frame& f, double max, std::string_view label) {
  svg.line("axis", f.right(), f.top, f.right(), f.bottom(), "#000000");
  for (int i = 0; i <= 5; ++i) {
    const double v = max * i / 5.0;
    const double y = f.top + f.height * (1.0 - i / 5.0);
    svg.line("tick", f.right(), y, f.right() + 4, y, "#000000");
    svg.text(f.right() + 6, y + 4, num(v), "start");
  }
  svg.text(f.right() + 44, f.top + f.height / 2, label, "middle", 90.0);
}

void require_rows(std::size_t n, const char* what) {
  if (n == 0) throw PreconditionError(std::string(what) + ": empty table");
}

// Line or, for a single point, a marker.
void series(Svg& svg, std::string_view cls, const std::vector<Point>& pts, std::string_view color,
            std::string_view extra = {}) {
  if (pts.size() == 1) {
    svg.circle(std::string(cls) + " marker", pts.front(), 4.0, color);
  } else {
    svg.polyline(cls, pts, color, extra);
  }
}

struct LevelScale {
  int lo, hi;
  double left, width;
  double x(int v) const {
    if (hi == lo) return left + width / 2;
    return left + width * static_cast<double>(v - lo) / static_cast<double>(hi - lo);
  }
};

}  // namespace

std::string render_category_chart(std::span<const MetricsSummary> rows) {
  require_rows(rows.size(), "category chart");
  const double slot = 48.0;
  Frame f{70.0, 40.0, std::max(360.0, slot * static_cast<double>(rows.size())), 260.0};
  Svg svg(f.right() + 80.0, f.bottom() + 140.0);
  svg.text(f.left + f.width / 2, 22, "CW-POR by category", "middle", 0.0, 14);

  double share_max = 0.0;
  for (const auto& r : rows) share_max = std::max(share_max, r.question_share);
  share_max = std::max(0.1, std::ceil(share_max * 10.0) / 10.0);

  left_axis(svg, f, "CW-POR");
  right_axis(svg, f, share_max, "question share");

  const double step = f.width / static_cast<double>(rows.size());
  std::vector<Point> share;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double cx = f.left + step * (static_cast<double>(i) + 0.5);
    const double bw = step * 0.6;
    svg.rect("bar", cx - bw / 2, f.y(r.cw_por), bw, f.bottom() - f.y(r.cw_por), kPalette[0]);
    svg.line("ci", cx, f.y(r.ci_high), cx, f.y(r.ci_low), "#000000");
    svg.line("ci-cap", cx - 5, f.y(r.ci_high), cx + 5, f.y(r.ci_high), "#000000");
    svg.line("ci-cap", cx - 5, f.y(r.ci_low), cx + 5, f.y(r.ci_low), "#000000");
    share.push_back({cx, f.top + f.height * (1.0 - r.question_share / share_max)});
    svg.text(cx, f.bottom() + 12, r.key.category.value_or(""), "end", -45.0);
  }
  svg.polyline("share", share, "#d62728");
  for (const auto& p : share) svg.circle("share-point", p, 3.0, "#d62728");
  return svg.str();
}

std::string render_type_model_chart(std::span<const MetricsSummary> rows) {
  require_rows(rows.size(), "type/model chart");
  std::vector<std::string> models;
  for (const auto& r : rows) {
    const auto m = r.key.model.value_or("");
    if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
  }
  const double group = 90.0;
  Frame f{70.0, 40.0, std::max(300.0, group * static_cast<double>(models.size())), 260.0};
  Svg svg(f.right() + 160.0, f.bottom() + 90.0);
  svg.text(f.left + f.width / 2, 22, "CW-POR by question type and model", "middle", 0.0, 14);
  left_axis(svg, f, "CW-POR");

  const double step = f.width / static_cast<double>(models.size());
  for (const auto& r : rows) {
    const auto m = std::find(models.begin(), models.end(), r.key.model.value_or("")) - models.begin();
    const bool adversarial = r.key.qtype.value_or(QuestionType::Adversarial) == QuestionType::Adversarial;
    const double bw = step * 0.3;
    const double x = f.left + step * static_cast<double>(m) + step * 0.2 + (adversarial ? 0.0 : bw);
    svg.rect(adversarial ? "bar adversarial" : "bar non-adversarial", x, f.y(r.cw_por), bw,
             f.bottom() - f.y(r.cw_por), adversarial ? kPalette[0] : kPalette[1]);
    svg.line("ci", x + bw / 2, f.y(r.ci_high), x + bw / 2, f.y(r.ci_low), "#000000");
  }
  for (std::size_t m = 0; m < models.size(); ++m) {
    svg.text(f.left + step * (static_cast<double>(m) + 0.5), f.bottom() + 16, models[m]);
  }
  svg.rect("legend", f.right() + 16, f.top, 12, 12, kPalette[0]);
  svg.text(f.right() + 34, f.top + 10, "Adversarial", "start");
  svg.rect("legend", f.right() + 16, f.top + 20, 12, 12, kPalette[1]);
  svg.text(f.right() + 34, f.top + 30, "Non-Adversarial", "start");
  return svg.str();
}

std::string render_verbosity_chart(std::span<const MetricsSummary> rows) {
  require_rows(rows.size(), "verbosity chart");
  std::vector<std::string> models;
  int lo = rows.front().key.verbosity.value_or(0);
  int hi = lo;
  for (const auto& r : rows) {
    const auto m = r.key.model.value_or("");
    if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
    lo = std::min(lo, r.key.verbosity.value_or(0));
    hi = std::max(hi, r.key.verbosity.value_or(0));
  }
  Frame f{70.0, 40.0, 420.0, 260.0};
  Svg svg(f.right() + 170.0, f.bottom() + 70.0);
  svg.text(f.left + f.width / 2, 22, "CW-POR vs. verbosity", "middle", 0.0, 14);
  left_axis(svg, f, "CW-POR");
  const LevelScale xs{lo, hi, f.left + 20.0, f.width - 40.0};
  std::set<int> levels;
  for (const auto& r : rows) levels.insert(r.key.verbosity.value_or(0));
  for (const int v : levels) svg.text(xs.x(v), f.bottom() + 16, std::to_string(v));
  svg.text(f.left + f.width / 2, f.bottom() + 40, "verbosity limit (words)");

  for (std::size_t m = 0; m < models.size(); ++m) {
    std::vector<Point> pts;
    for (const auto& r : rows) {
      if (r.key.model.value_or("") == models[m]) pts.push_back({xs.x(r.key.verbosity.value_or(0)), f.y(r.cw_por)});
    }
    const auto* color = kPalette[m % kPaletteSize];
    series(svg, "series", pts, color);
    svg.line("legend", f.right() + 16, f.top + 8 + 18.0 * m, f.right() + 36, f.top + 8 + 18.0 * m, color,
             " stroke-width=\"2\"");
    svg.text(f.right() + 42, f.top + 12 + 18.0 * m, models[m], "start");
  }
  return svg.str();
}

std::string render_trend_grid(std::span<const TrendRow> rows) {
  require_rows(rows.size(), "confidence trend grid");
  std::vector<std::string> models;
  int lo = rows.front().verbosity;
  int hi = lo;
  for (const auto& r : rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    lo = std::min(lo, r.verbosity);
    hi = std::max(hi, r.verbosity);
  }
  const double pw = 220.0;
  const double ph = 150.0;
  Svg svg(60.0 + (pw + 40.0) * static_cast<double>(models.size()), 2 * (ph + 60.0) + 60.0);
  svg.text(30.0 + (pw + 40.0) * static_cast<double>(models.size()) / 2, 22,
           "Confidence trends (solid = correct picks, dashed = overrides)", "middle", 0.0, 14);

  constexpr const char* kRowLabel[] = {"LL confidence", "rubric confidence"};
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (int row = 0; row < 2; ++row) {
      Frame f{60.0 + (pw + 40.0) * static_cast<double>(m), 50.0 + (ph + 60.0) * row, pw, ph};
      left_axis(svg, f, kRowLabel[row]);
      if (row == 0) svg.text(f.left + f.width / 2, f.top - 8, models[m]);
      const LevelScale xs{lo, hi, f.left + 12.0, f.width - 24.0};
      for (const auto outcome : {PickOutcome::Correct, PickOutcome::Override}) {
        std::vector<Point> pts;
        for (const auto& r : rows) {
          if (r.model != models[m] || r.outcome != outcome) continue;
          pts.push_back({xs.x(r.verbosity), f.y(row == 0 ? r.mean_llc : r.mean_rubric_norm)});
        }
        if (pts.empty()) continue;
        const bool correct = outcome == PickOutcome::Correct;
        series(svg, correct ? "trend correct" : "trend override", pts, correct ? kPalette[2] : kPalette[3],
               correct ? "" : " stroke-dasharray=\"6 4\"");
      }
      svg.text(f.left + f.width / 2, f.bottom() + 16, std::to_string(lo) + "-" + std::to_string(hi) + " words");
    }
  }
  return svg.str();
}

std::map<std::string, std::string> render_charts(const SummaryTables& tables) {
  return {{"cwpor_by_category.svg", render_category_chart(tables.by_category)},
          {"cwpor_by_type_model.svg", render_type_model_chart(tables.by_type_model)},
          {"cwpor_vs_verbosity.svg", render_verbosity_chart(tables.by_verbosity_model)},
          {"confidence_trends.svg", render_trend_grid(tables.confidence_trends)}};
}

void write_charts(const SummaryTables& tables, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : render_charts(tables)) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + (dir / name).string());
  }
}

}  // namespace cwpor

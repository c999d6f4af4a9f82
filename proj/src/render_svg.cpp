#include "treeglc/render_svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "treeglc/error.hpp"

namespace treeglc {

const std::string& RenderStyle::class_color(std::size_t k) const {
  static const std::string fallback = "#7f7f7f";
  return palette.empty() ? fallback : palette[k % palette.size()];
}

std::string svg_number(double v) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  std::string s(buf, p);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

constexpr const char* kMisclassified = "#d62728";

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  bool empty() const { return x0 > x1; }
  void add(Point p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  void merge(const Box& b) {
    if (b.empty()) return;
    add(Point{b.x0, b.y0});
    add(Point{b.x1, b.y1});
  }
};

// Buffers output per section; sections are joined in a fixed order.
class Canvas {
 public:
  Canvas(const RenderStyle& style, const std::vector<std::string>& classes)
      : style_(style), classes_(classes) {}

  std::ostringstream zones, arrows, cases, labels;
  Box box;

  std::string xy(const char* xa, const char* ya, Point p) {
    box.add(p);
    return std::string(" ") + xa + "=\"" + svg_number(p.x) + "\" " + ya + "=\"" +
           svg_number(p.y) + "\"";
  }
  std::string path_point(char cmd, Point p) {
    box.add(p);
    return std::string(1, cmd) + svg_number(p.x) + " " + svg_number(p.y) + " ";
  }
  const std::string& color_of(const std::string& cls) const {
    auto it = std::find(classes_.begin(), classes_.end(), cls);
    return style_.class_color(static_cast<std::size_t>(std::distance(classes_.begin(), it)));
  }
  void text(Point at, const std::string& s, const char* cls, const char* anchor = "middle") {
    const double w = 0.6 * style_.font_size * static_cast<double>(s.size());
    Box b;
    const double left = std::string_view(anchor) == "middle" ? at.x - w / 2 : at.x;
    b.add(Point{left, at.y - style_.font_size});
    b.add(Point{left + w, at.y});
    box.merge(b);
    labels << "<text class=\"" << cls << "\" x=\"" << svg_number(at.x) << "\" y=\""
           << svg_number(at.y) << "\" text-anchor=\"" << anchor << "\" font-family=\""
           << xml_escape(style_.font_family) << "\" font-size=\"" << svg_number(style_.font_size)
           << "\">" << xml_escape(s) << "</text>\n";
  }
  void arrowhead(std::ostringstream& os, Point tip, Point dir, const std::string& fill,
                 const char* cls) {
    const double len = length(dir);
    if (len == 0.0) return;
    const Point u = (1.0 / len) * dir;
    const Point n{-u.y, u.x};
    const Point base = tip - 6.0 * u;
    os << "<path class=\"" << cls << "\" d=\"" << path_point('M', tip)
       << path_point('L', base + 3.0 * n) << path_point('L', base - 3.0 * n) << "Z\" fill=\""
       << fill << "\"/>\n";
  }
  std::string body() const { return zones.str() + arrows.str() + cases.str() + labels.str(); }

 private:
  const RenderStyle& style_;
  const std::vector<std::string>& classes_;
};

std::string gray(double luminance) {
  const int v = static_cast<int>(std::lround(std::clamp(luminance, 0.0, 1.0) * 255.0));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", v, v, v);
  return buf;
}

void draw_bc(Canvas& cv, const BcScene& s, const RenderStyle& st) {
  for (const auto& e : s.edges) {
    cv.zones << "<line class=\"edge\"" << cv.xy("x1", "y1", e.from) << cv.xy("x2", "y2", e.to)
             << " stroke=\"#333333\" stroke-width=\"" << svg_number(st.edge_width) << "\"/>\n";
    if (e.dotted && st.show_dotted) {
      cv.zones << "<line class=\"extension\"" << cv.xy("x1", "y1", e.to)
               << cv.xy("x2", "y2", e.child_apex)
               << " stroke=\"#999999\" stroke-width=\"1.000\" stroke-dasharray=\"3 3\"/>\n";
    }
    for (const auto& tick : e.ticks) {
      cv.zones << "<circle class=\"tick\"" << cv.xy("cx", "cy", tick.at)
               << " r=\"1.500\" fill=\"#333333\"/>\n";
    }
  }
  for (const auto& leaf : s.leaves) {
    cv.zones << "<circle class=\"leaf\"" << cv.xy("cx", "cy", leaf.at) << " r=\"5.000\" fill=\""
             << cv.color_of(leaf.label) << "\"/>\n";
  }
  for (const auto& pl : s.polylines) {
    const auto& color = cv.color_of(pl.actual);
    if (pl.points.size() > 1) {
      cv.cases << "<path class=\"case\" d=\"";
      if (!pl.bezier.empty()) {
        cv.cases << cv.path_point('M', pl.bezier[0]);
        for (std::size_t i = 1; i + 2 < pl.bezier.size(); i += 3) {
          cv.cases << cv.path_point('C', pl.bezier[i]) << cv.path_point(' ', pl.bezier[i + 1])
                   << cv.path_point(' ', pl.bezier[i + 2]);
        }
      } else {
        cv.cases << cv.path_point('M', pl.points[0]);
        for (std::size_t i = 1; i < pl.points.size(); ++i) cv.cases << cv.path_point('L', pl.points[i]);
      }
      cv.cases << "\" fill=\"none\" stroke=\"" << color << "\" stroke-opacity=\"0.600\" stroke-width=\""
               << svg_number(st.case_width) << "\"/>\n";
    }
    if (!pl.points.empty()) {
      const auto& e = s.edges[pl.edge_index.back()];
      cv.arrowhead(cv.cases, pl.points.back(), e.to - e.from, color, "terminal");
    }
  }
  if (st.show_labels) {
    for (const auto& l : s.labels) cv.text(l.at, l.text, "label");
  }
}

void draw_spc(Canvas& cv, const SpcScene& s, const RenderStyle& st) {
  std::size_t shades = 0;
  for (const auto& p : s.plots) {
    for (const auto& z : p.zones) {
      if (z.action.kind == ZoneAction::Kind::forward) shades = std::max(shades, z.action.shade + 1);
    }
  }
  auto shade_color = [&](std::size_t k) {
    if (shades <= 1) return gray((st.gray_light + st.gray_dark) / 2.0);
    return gray(st.gray_light +
                (st.gray_dark - st.gray_light) * static_cast<double>(k) / static_cast<double>(shades - 1));
  };

  for (const auto& p : s.plots) {
    for (const auto& z : p.zones) {
      const Point a = p.to_scene(z.rect.x0, z.rect.y0);
      const Point b = p.to_scene(z.rect.x1, z.rect.y1);
      const Point lo{std::min(a.x, b.x), std::min(a.y, b.y)};
      const Point hi{std::max(a.x, b.x), std::max(a.y, b.y)};
      cv.box.add(lo);
      cv.box.add(hi);
      const bool terminal = z.action.kind == ZoneAction::Kind::terminal;
      const double opacity = terminal ? z.intensity.value_or(0.35) : 1.0;
      cv.zones << "<rect class=\"zone\" x=\"" << svg_number(lo.x) << "\" y=\"" << svg_number(lo.y)
               << "\" width=\"" << svg_number(hi.x - lo.x) << "\" height=\""
               << svg_number(hi.y - lo.y) << "\" fill=\""
               << (terminal ? cv.color_of(z.action.label) : shade_color(z.action.shade))
               << "\" fill-opacity=\"" << svg_number(opacity)
               << "\" stroke=\"#666666\" stroke-width=\"0.500\"/>\n";
    }
    if (st.show_labels) {
      const auto& names = s.tree.attribute_names;
      const auto& h = p.swap ? p.y : p.x;
      const auto& v = p.swap ? p.x : p.y;
      cv.text(p.offset + Point{p.size / 2.0, p.size + 14.0}, names[h.attribute], "axis");
      cv.text(p.offset + Point{-4.0, p.size / 2.0}, names[v.attribute], "axis", "end");
      cv.text(p.offset + Point{0.0, -6.0}, "plot " + std::to_string(p.id), "title", "start");
    }
  }
  if (st.show_arrows) {
    for (const auto& a : s.arrows) {
      const auto color = shade_color(a.shade);
      cv.arrows << "<line class=\"arrow\"" << cv.xy("x1", "y1", a.from) << cv.xy("x2", "y2", a.to)
                << " stroke=\"" << color << "\" stroke-width=\"1.000\"/>\n";
      cv.arrowhead(cv.arrows, a.to, a.to - a.from, color, "arrowhead");
    }
  }
  for (const auto& g : s.digraphs) {
    const auto& color = cv.color_of(g.actual);
    if (g.display.size() > 1) {
      cv.cases << "<path class=\"case\" d=\"" << cv.path_point('M', g.display[0]);
      for (std::size_t i = 1; i < g.display.size(); ++i) cv.cases << cv.path_point('L', g.display[i]);
      cv.cases << "\" fill=\"none\" stroke=\"" << color << "\" stroke-opacity=\"0.600\" stroke-width=\""
               << svg_number(st.case_width) << "\"/>\n";
    }
    for (std::size_t i = 0; i < g.display.size(); ++i) {
      if (g.condensed[i]) continue;
      const bool last = i + 1 == g.display.size();
      cv.cases << "<circle class=\"vertex\"" << cv.xy("cx", "cy", g.display[i]) << " r=\""
               << svg_number(st.vertex_radius) << "\" fill=\""
               << (last ? cv.color_of(g.predicted) : color) << "\"";
      if (g.misclassified) cv.cases << " stroke=\"" << kMisclassified << "\" stroke-width=\"1.500\"";
      cv.cases << "/>\n";
    }
  }
  for (const auto& r : s.representatives) {
    const double radius = st.vertex_radius + std::sqrt(static_cast<double>(r.weight));
    cv.cases << "<circle class=\"representative\"" << cv.xy("cx", "cy", r.at) << " r=\""
             << svg_number(radius) << "\" fill=\"" << (r.cls ? cv.color_of(*r.cls) : gray(0.4))
             << "\" fill-opacity=\"0.800\"/>\n";
  }
}

std::string draw(const Scene& scene, const RenderStyle& st, const std::vector<std::string>& classes,
                 Box& box) {
  Canvas cv(st, classes);
  std::visit(
      [&](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, BcScene>) {
          draw_bc(cv, s, st);
        } else {
          draw_spc(cv, s, st);
        }
      },
      scene);
  box = cv.box;
  return cv.body();
}

const std::vector<std::string>& classes_of(const Scene& s) {
  return std::visit([](const auto& sc) -> const std::vector<std::string>& { return sc.classes; },
                    s);
}

std::string legend(const std::vector<std::string>& classes, const RenderStyle& st, Point at,
                   Box& box) {
  std::ostringstream os;
  os << "<g class=\"legend\">\n";
  if (st.show_legend) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const Point c{at.x + 5.0, at.y + 14.0 * static_cast<double>(k) + 5.0};
      box.add(Point{c.x - 5.0, c.y - 5.0});
      box.add(Point{c.x + 12.0 + 0.6 * st.font_size * static_cast<double>(classes[k].size()), c.y + 5.0});
      os << "<circle cx=\"" << svg_number(c.x) << "\" cy=\"" << svg_number(c.y)
         << "\" r=\"5.000\" fill=\"" << st.class_color(k) << "\"/>\n"
         << "<text x=\"" << svg_number(c.x + 10.0) << "\" y=\"" << svg_number(c.y + 3.5)
         << "\" font-family=\"" << xml_escape(st.font_family) << "\" font-size=\""
         << svg_number(st.font_size) << "\">" << xml_escape(classes[k]) << "</text>\n";
    }
  }
  os << "</g>\n";
  return os.str();
}

std::string document(const std::string& content, Box box, const RenderStyle& st) {
  if (box.empty()) box.add(Point{});
  const double x = box.x0 - st.padding;
  const double y = box.y0 - st.padding;
  const double w = box.x1 - box.x0 + 2.0 * st.padding;
  const double h = box.y1 - box.y0 + 2.0 * st.padding;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << svg_number(x)
     << ' ' << svg_number(y) << ' ' << svg_number(w) << ' ' << svg_number(h) << "\" width=\""
     << svg_number(w) << "\" height=\"" << svg_number(h) << "\" style=\"background:"
     << xml_escape(st.background) << "\">\n"
     << content << "</svg>\n";
  return os.str();
}

}  // namespace

std::string render(const Scene& scene, const RenderStyle& style) {
  const auto& classes = classes_of(scene);
  Box box;
  std::string body = draw(scene, style, classes, box);
  const Point at = box.empty() ? Point{} : Point{box.x1 + style.padding, box.y0};
  body += legend(classes, style, at, box);
  return document(body, box, style);
}

std::string render_side_by_side(const Scene& left, const Scene& right, const RenderStyle& style,
                                const std::string& left_title, const std::string& right_title) {
  if (left.index() != right.index()) {
    throw Error(ErrorCode::invalid_argument, "side-by-side panels must hold the same scene kind");
  }
  std::vector<std::string> classes = classes_of(left);
  for (const auto& c : classes_of(right)) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  Box lb, rb;
  const std::string lbody = draw(left, style, classes, lb);
  const std::string rbody = draw(right, style, classes, rb);
  if (lb.empty()) lb.add(Point{});
  if (rb.empty()) rb.add(Point{});

  // Panels share a top edge; the right one starts one padding past the left.
  const double top = std::min(lb.y0, rb.y0) - 2.0 * style.font_size;
  const double shift = lb.x1 + 2.0 * style.padding - rb.x0;
  Box box;
  box.merge(lb);
  box.add(Point{rb.x0 + shift, rb.y0});
  box.add(Point{rb.x1 + shift, rb.y1});
  box.add(Point{lb.x0, top - style.font_size});

  std::ostringstream os;
  auto title = [&](double x, const std::string& s) {
    os << "<text class=\"panel-title\" x=\"" << svg_number(x) << "\" y=\"" << svg_number(top)
       << "\" font-family=\"" << xml_escape(style.font_family) << "\" font-size=\""
       << svg_number(style.font_size * 1.2) << "\">" << xml_escape(s) << "</text>\n";
  };
  os << "<g class=\"panel\" id=\"panel-left\">\n";
  title(lb.x0, left_title);
  os << lbody << "</g>\n";
  os << "<g class=\"panel\" id=\"panel-right\" transform=\"translate(" << svg_number(shift)
     << " 0.000)\">\n";
  title(rb.x0, right_title);
  os << rbody << "</g>\n";
  os << legend(classes, style, {box.x1 + style.padding, box.y0}, box);
  return document(os.str(), box, style);
}

}  // namespace treeglc

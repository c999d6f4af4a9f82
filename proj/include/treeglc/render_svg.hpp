#pragma once

#include <string>
#include <variant>
#include <vector>

#include "treeglc/layout_bc.hpp"
#include "treeglc/layout_spc.hpp"

namespace treeglc {

using Scene = std::variant<BcScene, SpcScene>;

struct RenderStyle {
  std::vector<std::string> palette{"#2ca02c", "#d62728", "#1f77b4", "#ff7f0e"};
  double edge_width = 2.0;
  double case_width = 1.0;
  double vertex_radius = 2.5;
  std::string font_family = "sans-serif";
  double font_size = 10.0;
  double padding = 20.0;
  double gray_light = 0.75;  // luminance of the lightest forward shade
  double gray_dark = 0.25;
  std::string background = "#ffffff";
  bool show_labels = true;
  bool show_legend = true;
  bool show_arrows = true;
  bool show_dotted = true;

  /// Color of the k-th class; cycles through the palette.
  const std::string& class_color(std::size_t k) const;
};

/// Standalone SVG. Scene coordinates are written unchanged; the viewBox is
/// fitted around them, so the scene-to-SVG transform is the identity.
std::string render(const Scene& scene, const RenderStyle& style = {});

/// Two panels with their own titles and one shared legend. Both scenes must
/// be of the same kind.
std::string render_side_by_side(const Scene& left, const Scene& right,
                                const RenderStyle& style = {},
                                const std::string& left_title = "train",
                                const std::string& right_title = "test");

/// Fixed three-decimal formatting used for every coordinate in the output.
std::string svg_number(double v);

std::string xml_escape(std::string_view s);

}  // namespace treeglc

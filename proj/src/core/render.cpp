#include "core/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/io_util.hpp"

namespace binpack {

namespace {

std::string color_for(int index) {
  const double hue = std::fmod(index * 137.508, 360.0);
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,65%%,62%%)", hue);
  return buf;
}

// An axis-aligned rectangle in grid units of one projection panel; v grows
// upward for side views and away from the viewer for the top view.
struct PanelRect {
  int index;
  int u, v, du, dv;
  int depth;  // painter order: drawn ascending
};

struct Panel {
  std::string view;
  int width, height;  // grid units
  bool flip;          // true when v grows upward
  std::vector<PanelRect> rects;
};

void draw_panel(std::string& svg, const Panel& panel, int offset_x, int offset_y) {
  char buf[512];
  const int W = panel.width * kCellPixels;
  const int H = panel.height * kCellPixels;
  std::snprintf(buf, sizeof buf,
                "<g transform=\"translate(%d,%d)\">\n"
                "<text x=\"0\" y=\"-6\" font-size=\"14\" font-family=\"monospace\">%s</text>\n"
                "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"white\" "
                "stroke=\"black\" stroke-width=\"2\"/>\n",
                offset_x, offset_y, panel.view.c_str(), W, H);
  svg += buf;
  std::vector<PanelRect> rects = panel.rects;
  std::stable_sort(rects.begin(), rects.end(),
                   [](const PanelRect& a, const PanelRect& b) { return a.depth < b.depth; });
  for (const PanelRect& r : rects) {
    const int px = r.u * kCellPixels;
    const int py = panel.flip ? (panel.height - r.v - r.dv) * kCellPixels : r.v * kCellPixels;
    const int pw = r.du * kCellPixels;
    const int ph = r.dv * kCellPixels;
    std::snprintf(buf, sizeof buf,
                  "<rect data-index=\"%d\" data-view=\"%s\" data-u=\"%d\" data-v=\"%d\" "
                  "data-du=\"%d\" data-dv=\"%d\" x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                  "fill=\"%s\" stroke=\"black\" stroke-width=\"1\"/>\n",
                  r.index, panel.view.c_str(), r.u, r.v, r.du, r.dv, px, py, pw, ph,
                  color_for(r.index).c_str());
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" font-family=\"monospace\" "
                  "text-anchor=\"middle\" dominant-baseline=\"middle\">%d</text>\n",
                  px + pw / 2, py + ph / 2, r.index);
    svg += buf;
  }
  svg += "</g>\n";
}

}  // namespace

std::vector<std::string> render_svg(const PackingResult& result) {
  std::vector<std::string> out;
  const BoxSpec& box = result.box;
  const int margin = 24;
  for (int b = 0; b < result.boxes_used(); ++b) {
    std::vector<Panel> panels;
    if (box.rank == 2) {
      Panel p{"front", box.length(), box.height(), true, {}};
      for (const auto& pl : result.placements) {
        if (pl.box_index != b) continue;
        p.rects.push_back({pl.object_index, pl.position.x, pl.position.z,
                           pl.dims.length(), pl.dims.height(), 0});
      }
      panels.push_back(std::move(p));
    } else {
      Panel top{"top", box.length(), box.width(), true, {}};
      Panel front{"front", box.length(), box.height(), true, {}};
      Panel side{"side", box.width(), box.height(), true, {}};
      for (const auto& pl : result.placements) {
        if (pl.box_index != b) continue;
        const auto& d = pl.dims;
        const auto& q = pl.position;
        // Viewed from above, higher tops cover lower ones.
        top.rects.push_back({pl.object_index, q.x, q.y, d.length(), d.width(),
                             q.z + d.height()});
        // Viewed from y = -inf, smaller y is nearer.
        front.rects.push_back({pl.object_index, q.x, q.z, d.length(), d.height(), -q.y});
        // Viewed from x = -inf, smaller x is nearer.
        side.rects.push_back({pl.object_index, q.y, q.z, d.width(), d.height(), -q.x});
      }
      panels = {std::move(top), std::move(front), std::move(side)};
    }
    int total_w = margin;
    int max_h = 0;
    for (const auto& p : panels) {
      total_w += p.width * kCellPixels + margin;
      max_h = std::max(max_h, p.height * kCellPixels);
    }
    const int total_h = max_h + 2 * margin;
    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\" data-box=\"%d\" data-instance=\"",
                  total_w, total_h, total_w, total_h, b);
    svg += buf;
    for (char c : result.id) {
      switch (c) {
        case '&': svg += "&amp;"; break;
        case '<': svg += "&lt;"; break;
        case '>': svg += "&gt;"; break;
        case '"': svg += "&quot;"; break;
        default: svg += c;
      }
    }
    svg += "\">\n";
    int x = margin;
    for (const auto& p : panels) {
      draw_panel(svg, p, x, margin);
      x += p.width * kCellPixels + margin;
    }
    svg += "</svg>\n";
    out.push_back(std::move(svg));
  }
  return out;
}

std::vector<std::filesystem::path> render_to_files(const PackingResult& result,
                                                   const std::string& prefix) {
  std::vector<std::filesystem::path> paths;
  const auto docs = render_svg(result);
  for (std::size_t b = 0; b < docs.size(); ++b) {
    std::filesystem::path p = prefix + "_box" + std::to_string(b) + ".svg";
    write_file_atomic(p, docs[b]);
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace binpack

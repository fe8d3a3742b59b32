#include "stroke_image.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "error.hpp"
#include "rng.hpp"
#include "textio.hpp"

namespace rp {

GridLayout load_layout_json(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(Errc::parse, path + ": not a JSON object");
  GridLayout layout;
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "GRID20")
      layout.kind = GridLayout::Kind::Grid20;
    else if (kind == "GRID14")
      layout.kind = GridLayout::Kind::Grid14;
    else
      fail(Errc::parse, path + ": kind must be GRID20 or GRID14");
    for (const auto& c : j.at("cells")) {
      GridCell cell;
      cell.index = c.at("index").get<int>();
      const auto& px = c.at("px");
      if (px.size() != 4)
        fail(Errc::parse, path + ": px must be [x,y,w,h]");
      cell.px = px[0].get<int>();
      cell.py = px[1].get<int>();
      cell.pw = px[2].get<int>();
      cell.ph = px[3].get<int>();
      const auto& ctr = c.at("center_mm");
      if (ctr.size() != 2)
        fail(Errc::parse, path + ": center_mm must be [x,y]");
      cell.center_x_mm = ctr[0].get<double>();
      cell.center_y_mm = ctr[1].get<double>();
      layout.cells.push_back(cell);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, path + ": " + e.what());
  }
  validate_layout(layout);
  std::sort(layout.cells.begin(), layout.cells.end(),
            [](const GridCell& a, const GridCell& b) { return a.index < b.index; });
  return layout;
}

void validate_layout(const GridLayout& layout) {
  size_t expected = layout.kind == GridLayout::Kind::Grid20 ? 20 : 14;
  if (layout.cells.size() != expected)
    fail(Errc::parse, "layout must list " + std::to_string(expected) + " cells, got " +
                          std::to_string(layout.cells.size()));
  for (const GridCell& c : layout.cells)
    if (c.pw <= 0 || c.ph <= 0)
      fail(Errc::parse, "cell " + std::to_string(c.index) + " has a degenerate rectangle");
  for (size_t i = 0; i < layout.cells.size(); ++i) {
    for (size_t k = i + 1; k < layout.cells.size(); ++k) {
      const GridCell& a = layout.cells[i];
      const GridCell& b = layout.cells[k];
      bool overlap = a.px < b.px + b.pw && b.px < a.px + a.pw && a.py < b.py + b.ph &&
                     b.py < a.py + a.ph;
      if (overlap)
        fail(Errc::parse, "cells " + std::to_string(a.index) + " and " + std::to_string(b.index) +
                              " overlap");
    }
  }
}

std::vector<std::pair<int, Canvas>> crop_cells(const Canvas& scan, const GridLayout& layout) {
  std::vector<std::pair<int, Canvas>> out;
  for (const GridCell& c : layout.cells) {
    if (c.px < 0 || c.py < 0 || c.px + c.pw > scan.width() || c.py + c.ph > scan.height())
      fail(Errc::invalid_argument,
           "cell " + std::to_string(c.index) + " rectangle leaves the scan bounds");
    Canvas cell(c.pw, c.ph);
    for (int y = 0; y < c.ph; ++y)
      for (int x = 0; x < c.pw; ++x)
        cell.set(x, y, scan.at(c.px + x, c.py + y));
    out.emplace_back(c.index, std::move(cell));
  }
  return out;
}

Canvas resize_bilinear(const Canvas& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0)
    fail(Errc::invalid_argument, "resize target must be positive");
  Canvas out(out_w, out_h);
  const double sx = static_cast<double>(src.width()) / out_w;
  const double sy = static_cast<double>(src.height()) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, src.height() - 1);
    int y1c = std::clamp(y0 + 1, 0, src.height() - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, src.width() - 1);
      int x1c = std::clamp(x0 + 1, 0, src.width() - 1);
      double top = (1.0 - wx) * src.at(x0c, y0c) + wx * src.at(x1c, y0c);
      double bot = (1.0 - wx) * src.at(x0c, y1c) + wx * src.at(x1c, y1c);
      out.set(x, y, (1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

Canvas normalize_stroke_image(const Canvas& cell, const std::optional<MaskRect>& index_mask) {
  if (cell.width() <= 0 || cell.height() <= 0)
    fail(Errc::invalid_argument, "empty cell image");
  // 99th-percentile white balance (nearest rank); robust to specular
  // scanner highlights that a max would latch onto
  std::vector<double> sorted(cell.pixels().begin(), cell.pixels().end());
  std::sort(sorted.begin(), sorted.end());
  size_t rank = static_cast<size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
  double p99 = sorted[std::min(rank == 0 ? 0 : rank - 1, sorted.size() - 1)];
  Canvas balanced(cell.width(), cell.height());
  double scale = p99 > 0.0 ? 1.0 / p99 : 1.0;
  for (int y = 0; y < cell.height(); ++y)
    for (int x = 0; x < cell.width(); ++x)
      balanced.set(x, y, std::clamp(cell.at(x, y) * scale, 0.0, 1.0));
  if (index_mask) {
    int x_end = std::min(index_mask->x + index_mask->w, balanced.width());
    int y_end = std::min(index_mask->y + index_mask->h, balanced.height());
    for (int y = std::max(0, index_mask->y); y < y_end; ++y)
      for (int x = std::max(0, index_mask->x); x < x_end; ++x)
        balanced.set(x, y, 1.0);
  }
  return resize_bilinear(balanced, kStrokeImageW, kStrokeImageH);
}

std::vector<Canvas> synth_corpus(int count, uint64_t seed) {
  if (count < 1)
    fail(Errc::invalid_argument, "corpus size must be >= 1");
  Rng root(seed);
  std::vector<Canvas> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = root.derive(static_cast<uint64_t>(i));
    Stroke s;
    s.x0 = rng.uniform(0.1, 0.9);
    s.y0 = rng.uniform(0.15, 0.85);
    s.x2 = rng.uniform(0.1, 0.9);
    s.y2 = rng.uniform(0.15, 0.85);
    s.x1 = rng.uniform(std::min(s.x0, s.x2), std::max(s.x0, s.x2));
    s.y1 = rng.uniform(0.1, 0.9);
    s.r0 = rng.log_uniform(0.02, 0.1);
    s.r1 = rng.log_uniform(0.02, 0.1);
    s.g = rng.uniform(0.0, 0.35);
    Canvas img(kStrokeImageW, kStrokeImageH);
    render_stroke_in_place(img, s);
    out.push_back(std::move(img));
  }
  return out;
}

} // namespace rp

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canvas.hpp"

namespace rp {

// Stroke scans are stored 32 rows x 64 columns, one channel.
inline constexpr int kStrokeImageW = 64;
inline constexpr int kStrokeImageH = 32;

struct GridCell {
  int index = 0;
  int px = 0, py = 0, pw = 0, ph = 0; // crop rectangle in scan pixels
  double center_x_mm = 0, center_y_mm = 0;
};

struct GridLayout {
  enum class Kind { Grid20, Grid14 };
  Kind kind = Kind::Grid20;
  std::vector<GridCell> cells;
};

// {"kind":"GRID20","cells":[{"index":0,"px":[x,y,w,h],"center_mm":[x,y]},...]}
GridLayout load_layout_json(const std::string& path);
void validate_layout(const GridLayout& layout);

// Sub-image per cell, in cell-index order. Rectangles must sit inside the
// scan.
std::vector<std::pair<int, Canvas>> crop_cells(const Canvas& scan, const GridLayout& layout);

struct MaskRect {
  int x = 0, y = 0, w = 0, h = 0; // cell-local pixels
};

// White balance against the 99th-percentile intensity, blank out the
// printed cell index, resize to 32 x 64 with bilinear filtering.
Canvas normalize_stroke_image(const Canvas& cell, const std::optional<MaskRect>& index_mask);

Canvas resize_bilinear(const Canvas& src, int out_w, int out_h);

// Synthetic training images: one random valid stroke rendered dark on
// white per 32 x 64 canvas. Stands in for scanned artist sheets.
std::vector<Canvas> synth_corpus(int count, uint64_t seed);

} // namespace rp

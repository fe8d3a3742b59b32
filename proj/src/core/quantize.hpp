#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stroke.hpp"

namespace rp {

struct QuantizerConfig {
  int k_gray = 5;      // gray palette size
  int k_thickness = 4; // (r0, r1) class count
  int max_iters = 100;
  int restarts = 10;
  uint64_t seed = 0;
};

struct Palette {
  std::vector<double> grays;                    // ascending
  std::vector<std::array<double, 2>> thicknesses; // sorted by r0, then r1
};

struct QuantizeResult {
  std::vector<Stroke> strokes;
  Palette palette;
};

// Clusters the gray values (1-D) and the (r0, r1) pairs (2-D) separately
// and snaps every stroke to its assigned centroids. Geometry is untouched.
QuantizeResult quantize(const std::vector<Stroke>& seq, const QuantizerConfig& cfg);

// Exact-match palette lookups; -1 when absent.
int gray_index(const Palette& p, double g);
int thickness_index(const Palette& p, double r0, double r1);

void save_palette_json(const Palette& p, const std::string& path);
Palette load_palette_json(const std::string& path);

} // namespace rp

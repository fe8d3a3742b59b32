// Shared test oracles, independent of the implementation paths they check.
#pragma once

#include <algorithm>
#include <vector>

#include "core/canvas.hpp"
#include "core/rng.hpp"

namespace rp::testing {

// Brute-force stroke footprint: per pixel, scan the full curve sample set
// and apply the disc inequality directly.
inline std::vector<char> oracle_footprint(const Stroke& s, int w, int h, double samples_per_px) {
  const int n = curve_sample_count(s, w, h, samples_per_px);
  const double dim = std::max(w, h);
  std::vector<char> mask(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = false;
      for (int i = 0; i < n && !hit; ++i) {
        double t = static_cast<double>(i) / (n - 1);
        Vec2 p = eval_point(s, t);
        double cx = p.x * w;
        double cy = p.y * h;
        double rad = eval_radius(s, t) * dim;
        double dx = (x + 0.5) - cx;
        double dy = (y + 0.5) - cy;
        hit = dx * dx + dy * dy <= rad * rad;
      }
      mask[static_cast<size_t>(y) * w + x] = hit ? 1 : 0;
    }
  }
  return mask;
}

inline std::vector<char> painted_mask(const Canvas& before, const Canvas& after) {
  std::vector<char> mask(before.pixels().size(), 0);
  for (size_t i = 0; i < mask.size(); ++i)
    mask[i] = before.pixels()[i] != after.pixels()[i] ? 1 : 0;
  return mask;
}

inline Stroke random_stroke(Rng& rng, double gray = 0.0) {
  Stroke s;
  s.x0 = rng.uniform01();
  s.y0 = rng.uniform01();
  s.x1 = rng.uniform01();
  s.y1 = rng.uniform01();
  s.x2 = rng.uniform01();
  s.y2 = rng.uniform01();
  s.r0 = rng.log_uniform(0.005, kMaxStrokeRadius);
  s.r1 = rng.log_uniform(0.005, kMaxStrokeRadius);
  s.g = gray;
  return s;
}

// Exhaustive-partition k-means optimum for tiny 1-D instances.
inline double exhaustive_kmeans_1d(const std::vector<double>& pts, int k) {
  const size_t n = pts.size();
  size_t combos = 1;
  for (size_t i = 0; i < n; ++i)
    combos *= static_cast<size_t>(k);
  double best = std::numeric_limits<double>::infinity();
  for (size_t code = 0; code < combos; ++code) {
    size_t c = code;
    std::vector<int> label(n);
    for (size_t i = 0; i < n; ++i) {
      label[i] = static_cast<int>(c % k);
      c /= k;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (size_t i = 0; i < n; ++i) {
      sum[label[i]] += pts[i];
      ++count[label[i]];
    }
    if (!std::all_of(count.begin(), count.end(), [](int v) { return v > 0; }))
      continue;
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double d = pts[i] - sum[label[i]] / count[label[i]];
      inertia += d * d;
    }
    best = std::min(best, inertia);
  }
  return best;
}

} // namespace rp::testing

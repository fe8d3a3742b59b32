#pragma once

#include <span>
#include <string>
#include <vector>

#include "stroke.hpp"

namespace rp {

// Grayscale raster surface. Intensities live in [0,1]; a fresh canvas is
// white. Value type: render operations return new canvases.
class Canvas {
public:
  Canvas() = default;
  Canvas(int width, int height, double value = 1.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }
  void set(int x, int y, double v) { pixels_[static_cast<size_t>(y) * width_ + x] = v; }
  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  bool operator==(const Canvas&) const = default;

private:
  int width_ = 0, height_ = 0;
  std::vector<double> pixels_;
};

inline constexpr double kDefaultSamplesPerPixel = 4.0;

// Number of curve samples the renderer uses for a stroke on a W x H
// canvas. Derived from the control-polygon length (an upper bound on arc
// length) so that consecutive samples sit closer than 1/samples_per_px
// pixels along the curve. Part of the rendering contract: the painted
// footprint is the union of discs at exactly these samples.
int curve_sample_count(const Stroke& s, int width, int height, double samples_per_px);

// Overwrites every pixel whose center lies within the stroke's radius of
// some curve sample with the stroke's gray. No blending.
void render_stroke_in_place(Canvas& c, const Stroke& s,
                            double samples_per_px = kDefaultSamplesPerPixel);
Canvas render_stroke(const Canvas& c, const Stroke& s,
                     double samples_per_px = kDefaultSamplesPerPixel);

// Left fold of render_stroke; later strokes overpaint earlier ones.
Canvas render_sequence(const Canvas& c, std::span<const Stroke> seq,
                       double samples_per_px = kDefaultSamplesPerPixel);

// Renders at `factor` times the canvas resolution and box-averages down.
// Smooths edges for previews; factor 1 is the plain renderer.
Canvas render_sequence_supersampled(const Canvas& c, std::span<const Stroke> seq, int factor,
                                    double samples_per_px = kDefaultSamplesPerPixel);

// Mean squared intensity difference; throws Errc::shape_mismatch.
double mse(const Canvas& a, const Canvas& b);

// Binary PGM (P5, maxval 255). Intensity i maps to byte round(i*255).
Canvas load_pgm(const std::string& path);
void save_pgm(const Canvas& c, const std::string& path);

} // namespace rp

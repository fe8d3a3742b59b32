#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "canvas.hpp"
#include "rng.hpp"
#include "stroke.hpp"

namespace rp {

struct SbrConfig {
  int budget = 250;             // stroke count cap
  int proposals_per_step = 64;  // candidates drawn per accepted stroke
  int refine_iters = 30;        // hill-climb rounds on the winning candidate
  double rho = 0.0;             // control-point restriction factor
  double min_improvement = 1e-6; // required MSE decrease per stroke
  uint64_t seed = 0;
  double samples_per_px = kDefaultSamplesPerPixel;
};

struct PaintResult {
  std::vector<Stroke> strokes;
  std::vector<double> mse_trace; // loss after each accepted stroke
  double initial_mse = 0.0;
};

// One residual-guided random proposal: endpoints drawn proportionally to
// |target - current|, gray read off the target at the start point, radii
// log-uniform, middle control point inside the chord bounding box, then
// restricted. Empty when the residual is identically zero.
std::optional<Stroke> propose_stroke(const Canvas& target, const Canvas& current, double rho,
                                     Rng& rng);

// Accept-if-better Gaussian hill climb over all nine parameters. The
// result never scores worse than the input.
Stroke refine_stroke(const Canvas& target, const Canvas& current, const Stroke& s, int iters,
                     double rho, Rng& rng, double samples_per_px = kDefaultSamplesPerPixel);

// Greedy painting loop: propose a batch, keep the best candidate, refine
// it, accept while the loss keeps dropping by at least min_improvement.
PaintResult paint(const Canvas& target, const SbrConfig& cfg);

} // namespace rp

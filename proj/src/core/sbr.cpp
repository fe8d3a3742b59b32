#include "sbr.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace rp {

namespace {

constexpr double kMinProposalRadius = 0.005;
constexpr double kMinRadius = 1e-3; // refinement clamp floor

double stroke_loss(const Canvas& target, const Canvas& current, const Stroke& s,
                   double samples_per_px) {
  return mse(render_stroke(current, s, samples_per_px), target);
}

Stroke clamp_to_invariants(Stroke s) {
  s.x0 = std::clamp(s.x0, 0.0, 1.0);
  s.y0 = std::clamp(s.y0, 0.0, 1.0);
  s.x1 = std::clamp(s.x1, 0.0, 1.0);
  s.y1 = std::clamp(s.y1, 0.0, 1.0);
  s.x2 = std::clamp(s.x2, 0.0, 1.0);
  s.y2 = std::clamp(s.y2, 0.0, 1.0);
  s.r0 = std::clamp(s.r0, kMinRadius, kMaxStrokeRadius);
  s.r1 = std::clamp(s.r1, kMinRadius, kMaxStrokeRadius);
  s.g = std::clamp(s.g, 0.0, 1.0);
  return s;
}

} // namespace

std::optional<Stroke> propose_stroke(const Canvas& target, const Canvas& current, double rho,
                                     Rng& rng) {
  if (target.width() != current.width() || target.height() != current.height())
    fail(Errc::shape_mismatch, "target and current canvas dimensions differ");
  const int w = target.width(), h = target.height();
  auto pt = target.pixels();
  auto pc = current.pixels();
  std::vector<double> cumulative(pt.size());
  double total = 0.0;
  for (size_t i = 0; i < pt.size(); ++i) {
    total += std::abs(pt[i] - pc[i]);
    cumulative[i] = total;
  }
  if (total == 0.0)
    return std::nullopt;

  auto draw_endpoint = [&](size_t pix) -> Vec2 {
    int px = static_cast<int>(pix) % w;
    int py = static_cast<int>(pix) / w;
    return {(px + rng.uniform01()) / w, (py + rng.uniform01()) / h};
  };

  size_t start_pix = rng.weighted(cumulative);
  size_t end_pix = rng.weighted(cumulative);
  Stroke s;
  Vec2 p0 = draw_endpoint(start_pix);
  Vec2 p2 = draw_endpoint(end_pix);
  s.x0 = p0.x;
  s.y0 = p0.y;
  s.x2 = p2.x;
  s.y2 = p2.y;
  s.x1 = rng.uniform(std::min(s.x0, s.x2), std::max(s.x0, s.x2));
  s.y1 = rng.uniform(std::min(s.y0, s.y2), std::max(s.y0, s.y2));
  // mapped from the top so the draw lands in (min, max]: the cap itself is
  // a legal radius, the open bottom end is not
  s.r0 = rng.log_uniform(kMaxStrokeRadius, kMinProposalRadius);
  s.r1 = rng.log_uniform(kMaxStrokeRadius, kMinProposalRadius);
  s.g = pt[start_pix];
  return restrict_control(s, rho);
}

Stroke refine_stroke(const Canvas& target, const Canvas& current, const Stroke& s, int iters,
                     double rho, Rng& rng, double samples_per_px) {
  validate_stroke(s);
  constexpr double kSigmaPos = 0.05;
  constexpr double kSigmaRad = 0.02;
  constexpr double kSigmaGray = 0.05;
  Stroke best = s;
  double best_loss = stroke_loss(target, current, best, samples_per_px);
  for (int i = 0; i < iters; ++i) {
    Stroke cand = best;
    cand.x0 += rng.normal() * kSigmaPos;
    cand.y0 += rng.normal() * kSigmaPos;
    cand.x1 += rng.normal() * kSigmaPos;
    cand.y1 += rng.normal() * kSigmaPos;
    cand.x2 += rng.normal() * kSigmaPos;
    cand.y2 += rng.normal() * kSigmaPos;
    cand.r0 += rng.normal() * kSigmaRad;
    cand.r1 += rng.normal() * kSigmaRad;
    cand.g += rng.normal() * kSigmaGray;
    cand = restrict_control(clamp_to_invariants(cand), rho);
    double loss = stroke_loss(target, current, cand, samples_per_px);
    if (loss < best_loss) {
      best = cand;
      best_loss = loss;
    }
  }
  return best;
}

PaintResult paint(const Canvas& target, const SbrConfig& cfg) {
  if (cfg.budget < 0)
    fail(Errc::invalid_argument, "budget must be non-negative");
  if (cfg.proposals_per_step < 1)
    fail(Errc::invalid_argument, "proposals_per_step must be >= 1");
  if (cfg.min_improvement < 0)
    fail(Errc::invalid_argument, "min_improvement must be non-negative");
  if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0))
    fail(Errc::invalid_argument, "rho must lie in [0,1]");

  Rng root(cfg.seed);
  Canvas current(target.width(), target.height());
  PaintResult result;
  result.initial_mse = mse(current, target);
  double loss = result.initial_mse;

  for (int step = 0; step < cfg.budget; ++step) {
    Rng step_rng = root.derive(static_cast<uint64_t>(step));
    // Candidates come from per-index derived streams so a parallel
    // evaluation would reproduce the sequential result exactly.
    std::optional<Stroke> best_cand;
    double best_cand_loss = 0.0;
    for (int i = 0; i < cfg.proposals_per_step; ++i) {
      Rng cand_rng = step_rng.derive(static_cast<uint64_t>(i));
      std::optional<Stroke> cand = propose_stroke(target, current, cfg.rho, cand_rng);
      if (!cand)
        break; // zero residual: nothing left to paint
      double cand_loss = stroke_loss(target, current, *cand, cfg.samples_per_px);
      if (!best_cand || cand_loss < best_cand_loss) {
        best_cand = cand;
        best_cand_loss = cand_loss;
      }
    }
    if (!best_cand)
      break;

    Rng refine_rng = step_rng.derive(static_cast<uint64_t>(cfg.proposals_per_step));
    Stroke refined = refine_stroke(target, current, *best_cand, cfg.refine_iters, cfg.rho,
                                   refine_rng, cfg.samples_per_px);
    double refined_loss = stroke_loss(target, current, refined, cfg.samples_per_px);
    if (loss - refined_loss < cfg.min_improvement)
      break; // no candidate improves enough

    render_stroke_in_place(current, refined, cfg.samples_per_px);
    loss = refined_loss;
    result.strokes.push_back(refined);
    result.mse_trace.push_back(loss);
  }
  return result;
}

} // namespace rp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "core/canvas.hpp"
#include "core/error.hpp"
#include "core/sbr.hpp"

using namespace rp;

namespace {

Canvas disc_target(int n, double radius_frac) {
  Canvas c(n, n);
  double cx = n / 2.0, cy = n / 2.0, rad = radius_frac * n;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double dx = (x + 0.5) - cx, dy = (y + 0.5) - cy;
      if (dx * dx + dy * dy <= rad * rad)
        c.set(x, y, 0.0);
    }
  return c;
}

Canvas half_black_target(int n) {
  Canvas c(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n / 2; ++x)
      c.set(x, y, 0.0);
  return c;
}

Stroke random_valid_stroke(Rng& rng) {
  Stroke s;
  s.x0 = rng.uniform01();
  s.y0 = rng.uniform01();
  s.x1 = rng.uniform01();
  s.y1 = rng.uniform01();
  s.x2 = rng.uniform01();
  s.y2 = rng.uniform01();
  s.r0 = rng.log_uniform(0.005, kMaxStrokeRadius);
  s.r1 = rng.log_uniform(0.005, kMaxStrokeRadius);
  s.g = rng.uniform01();
  return s;
}

std::string serialize(const std::vector<Stroke>& seq) {
  std::string out;
  for (const Stroke& s : seq)
    out += stroke_json_line(s) + "\n";
  return out;
}

} // namespace

TEST_CASE("propose_stroke signals an exhausted residual") {
  Canvas target(8, 8, 0.3);
  Canvas current = target;
  Rng rng(1);
  CHECK(!propose_stroke(target, current, 0.0, rng).has_value());
}

TEST_CASE("propose_stroke draws start points from the residual distribution") {
  const int n = 16;
  Canvas current(n, n);
  Canvas target(n, n);
  target.set(5, 7, 0.0); // lone black pixel

  Rng root(1234);
  for (int i = 0; i < 10000; ++i) {
    Rng rng = root.derive(i);
    auto s = propose_stroke(target, current, 0.0, rng);
    REQUIRE(s.has_value());
    CHECK(static_cast<int>(s->x0 * n) == 5);
    CHECK(static_cast<int>(s->y0 * n) == 7);
    CHECK(s->g == 0.0); // gray read off the target at the start pixel
  }
}

TEST_CASE("propose_stroke start distribution follows residual weights (chi-squared)") {
  const int n = 8;
  Canvas current(n, n);
  Canvas target(n, n);
  target.set(1, 1, 0.25); // residual 0.75
  target.set(6, 6, 0.75); // residual 0.25

  Rng root(77);
  int count_a = 0, count_b = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    Rng rng = root.derive(i);
    auto s = propose_stroke(target, current, 0.0, rng);
    REQUIRE(s.has_value());
    int px = static_cast<int>(s->x0 * n), py = static_cast<int>(s->y0 * n);
    if (px == 1 && py == 1)
      ++count_a;
    else if (px == 6 && py == 6)
      ++count_b;
  }
  CHECK(count_a + count_b == draws);
  double ea = draws * 0.75, eb = draws * 0.25;
  double chi2 = (count_a - ea) * (count_a - ea) / ea + (count_b - eb) * (count_b - eb) / eb;
  CHECK(chi2 < 10.83); // 0.1% critical value, 1 dof
}

TEST_CASE("proposals honor stroke invariants and the requested restriction") {
  Canvas current(16, 16);
  Canvas target = disc_target(16, 0.3);
  Rng root(5);
  for (double rho : {0.0, 1.0}) {
    for (int i = 0; i < 300; ++i) {
      Rng rng = root.derive(i + (rho > 0 ? 1000 : 0));
      auto s = propose_stroke(target, current, rho, rng);
      REQUIRE(s.has_value());
      CHECK(stroke_valid(*s));
      CHECK(restrict_control(*s, rho) == *s);
    }
  }
}

TEST_CASE("refine_stroke with zero iterations is the identity") {
  Canvas target = disc_target(16, 0.3);
  Canvas current(16, 16);
  Rng rng(3);
  Stroke s = random_valid_stroke(rng);
  CHECK(refine_stroke(target, current, s, 0, 0.0, rng) == s);
}

TEST_CASE("refine_stroke never loses ground") {
  Canvas target = disc_target(16, 0.3);
  Canvas current(16, 16);
  Rng root(11);
  for (int i = 0; i < 25; ++i) {
    Rng rng = root.derive(i);
    Stroke s = random_valid_stroke(rng);
    double before = mse(render_stroke(current, s), target);
    Stroke r = refine_stroke(target, current, s, 20, 0.0, rng);
    double after = mse(render_stroke(current, r), target);
    CHECK(after <= before);
    CHECK(stroke_valid(r));
  }
}

TEST_CASE("one engine step beats a 1000-draw random search on the disc target") {
  Canvas target = disc_target(16, 0.3);
  Canvas current(16, 16);

  // random-search oracle, same stochastic budget class
  Rng oracle_rng(2024);
  double oracle_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    Stroke s = random_valid_stroke(oracle_rng);
    oracle_best = std::min(oracle_best, mse(render_stroke(current, s), target));
  }

  Rng engine_rng(2024);
  Stroke best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64; ++i) {
    Rng rng = engine_rng.derive(i);
    auto cand = propose_stroke(target, current, 0.0, rng);
    REQUIRE(cand.has_value());
    double loss = mse(render_stroke(current, *cand), target);
    if (loss < best_loss) {
      best_loss = loss;
      best = *cand;
    }
  }
  Rng refine_rng = engine_rng.derive(64);
  Stroke refined = refine_stroke(target, current, best, 30, 0.0, refine_rng);
  double refined_loss = mse(render_stroke(current, refined), target);
  CHECK(refined_loss <= oracle_best);
}

TEST_CASE("paint on an all-white target returns an empty sequence") {
  Canvas target(16, 16, 1.0);
  SbrConfig cfg;
  cfg.seed = 9;
  PaintResult r = paint(target, cfg);
  CHECK(r.strokes.empty());
  CHECK(r.mse_trace.empty());
  CHECK(r.initial_mse == 0.0);
}

TEST_CASE("paint respects the stroke budget") {
  Canvas target = disc_target(16, 0.3);
  SbrConfig cfg;
  cfg.budget = 3;
  cfg.proposals_per_step = 8;
  cfg.refine_iters = 4;
  cfg.seed = 1;
  PaintResult r = paint(target, cfg);
  CHECK(r.strokes.size() <= 3);
  CHECK(r.mse_trace.size() == r.strokes.size());

  cfg.budget = 0;
  CHECK(paint(target, cfg).strokes.empty());
}

TEST_CASE("paint reaches a tenth of the initial loss on the half-black target") {
  Canvas target = half_black_target(32);

  // feasibility oracle: one hand-built stroke already nails the black half
  Stroke cover;
  cover.x0 = 0.25;
  cover.y0 = 0.0;
  cover.x1 = 0.25;
  cover.y1 = 0.5;
  cover.x2 = 0.25;
  cover.y2 = 1.0;
  cover.r0 = cover.r1 = 0.25;
  cover.g = 0.0;
  Canvas blank(32, 32);
  CHECK(mse(render_stroke(blank, cover), target) == 0.0);

  SbrConfig cfg;
  cfg.budget = 20;
  cfg.seed = 7;
  PaintResult r = paint(target, cfg);
  REQUIRE(!r.mse_trace.empty());
  CHECK(r.mse_trace.back() <= 0.10 * r.initial_mse);

  // the trace drops by at least min_improvement every step
  double prev = r.initial_mse;
  for (double v : r.mse_trace) {
    CHECK(prev - v >= cfg.min_improvement);
    prev = v;
  }
}

TEST_CASE("paint emits only valid restricted strokes") {
  Canvas target = disc_target(24, 0.35);
  for (double rho : {0.0, 1.0}) {
    SbrConfig cfg;
    cfg.budget = 10;
    cfg.proposals_per_step = 16;
    cfg.refine_iters = 8;
    cfg.rho = rho;
    cfg.seed = 21;
    PaintResult r = paint(target, cfg);
    REQUIRE(!r.strokes.empty());
    for (const Stroke& s : r.strokes) {
      CHECK(stroke_valid(s));
      CHECK(restrict_control(s, rho) == s);
    }
  }
}

TEST_CASE("paint is deterministic byte-for-byte") {
  Canvas target = disc_target(24, 0.3);
  SbrConfig cfg;
  cfg.budget = 12;
  cfg.proposals_per_step = 16;
  cfg.refine_iters = 8;
  cfg.seed = 1337;
  PaintResult a = paint(target, cfg);
  PaintResult b = paint(target, cfg);
  CHECK(serialize(a.strokes) == serialize(b.strokes));
  CHECK(a.mse_trace == b.mse_trace);

  cfg.seed = 1338;
  PaintResult c = paint(target, cfg);
  CHECK(serialize(a.strokes) != serialize(c.strokes)); // seed actually matters
}

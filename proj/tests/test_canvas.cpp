#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <vector>

#include "core/canvas.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace rp;
using testing::oracle_footprint;
using testing::painted_mask;
using testing::random_stroke;

TEST_CASE("fresh canvases are white and bounds are enforced") {
  Canvas c(4, 3);
  CHECK(c.width() == 4);
  CHECK(c.height() == 3);
  for (double v : c.pixels())
    CHECK(v == 1.0);
  CHECK_THROWS_AS(Canvas(0, 3), Error);
  CHECK_THROWS_AS(Canvas(3, 3, 1.5), Error);
}

TEST_CASE("mse basics") {
  Canvas white(8, 8, 1.0);
  Canvas black(8, 8, 0.0);
  CHECK(mse(white, white) == 0.0);
  CHECK(mse(white, black) == 1.0);
  CHECK(mse(black, white) == 1.0); // symmetry

  Canvas half(8, 8, 1.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 4; ++x)
      half.set(x, y, 0.0);
  CHECK(mse(half, white) == 0.5);

  Canvas other(4, 8);
  CHECK_THROWS_AS(mse(white, other), Error);
}

TEST_CASE("rendering a stroke matching the background changes nothing") {
  Canvas c(16, 16, 0.5);
  Stroke s;
  s.x0 = 0.2;
  s.y0 = 0.2;
  s.x1 = 0.5;
  s.y1 = 0.8;
  s.x2 = 0.8;
  s.y2 = 0.2;
  s.r0 = s.r1 = 0.1;
  s.g = 0.5;
  CHECK(render_stroke(c, s) == c);
}

TEST_CASE("a point stroke paints a filled disc") {
  const int n = 32;
  Canvas c(n, n);
  Stroke s;
  s.x0 = s.x1 = s.x2 = 0.5;
  s.y0 = s.y1 = s.y2 = 0.5;
  s.r0 = s.r1 = 0.2;
  s.g = 0.0;
  Canvas out = render_stroke(c, s);
  double cx = 0.5 * n, cy = 0.5 * n, rad = 0.2 * n;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double dx = (x + 0.5) - cx, dy = (y + 0.5) - cy;
      bool inside = dx * dx + dy * dy <= rad * rad;
      CHECK(out.at(x, y) == (inside ? 0.0 : 1.0));
    }
  }
}

TEST_CASE("full-width stroke footprint matches the brute-force oracle on 8x8") {
  Stroke s;
  s.x0 = 0.0;
  s.y0 = 0.5;
  s.x1 = 0.5;
  s.y1 = 0.5;
  s.x2 = 1.0;
  s.y2 = 0.5;
  s.r0 = s.r1 = 0.25;
  s.g = 0.0;
  Canvas before(8, 8);
  Canvas after = render_stroke(before, s);
  CHECK(painted_mask(before, after) == oracle_footprint(s, 8, 8, kDefaultSamplesPerPixel));
}

TEST_CASE("random stroke footprints match the oracle exactly") {
  Rng rng(101);
  for (int i = 0; i < 60; ++i) {
    int w = 2 + static_cast<int>(rng.below(15));
    int h = 2 + static_cast<int>(rng.below(15));
    Stroke s = random_stroke(rng);
    Canvas before(w, h);
    Canvas after = render_stroke(before, s);
    REQUIRE(painted_mask(before, after) == oracle_footprint(s, w, h, kDefaultSamplesPerPixel));
  }
}

TEST_CASE("render_stroke is idempotent and clamps to [0,1]") {
  Rng rng(55);
  for (int i = 0; i < 20; ++i) {
    Stroke s = random_stroke(rng);
    s.g = rng.uniform01();
    Canvas c(12, 12);
    Canvas once = render_stroke(c, s);
    CHECK(render_stroke(once, s) == once);
    for (double v : once.pixels()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("growing the radii never shrinks the footprint") {
  Rng rng(77);
  for (int i = 0; i < 30; ++i) {
    Stroke s = random_stroke(rng);
    s.r0 = rng.uniform(0.005, 0.12);
    s.r1 = rng.uniform(0.005, 0.12);
    Stroke bigger = s;
    bigger.r0 = std::min(kMaxStrokeRadius, s.r0 * 1.8);
    bigger.r1 = std::min(kMaxStrokeRadius, s.r1 * 1.8);
    Canvas blank(10, 10);
    auto small_mask = painted_mask(blank, render_stroke(blank, s));
    auto big_mask = painted_mask(blank, render_stroke(blank, bigger));
    for (size_t k = 0; k < small_mask.size(); ++k)
      if (small_mask[k])
        CHECK(big_mask[k]);
  }
}

TEST_CASE("render_sequence folds left and overpaints in order") {
  Canvas c(16, 16);
  CHECK(render_sequence(c, {}) == c);

  Stroke black;
  black.x0 = black.x1 = black.x2 = 0.5;
  black.y0 = black.y1 = black.y2 = 0.5;
  black.r0 = black.r1 = 0.2;
  black.g = 0.0;
  Stroke white = black;
  white.g = 1.0;
  std::vector<Stroke> seq{black, white};
  CHECK(render_sequence(c, seq) == c); // white disc overwrites the black one

  Rng rng(9);
  std::vector<Stroke> strokes;
  for (int i = 0; i < 8; ++i) {
    Stroke s = random_stroke(rng);
    s.g = rng.uniform01();
    strokes.push_back(s);
  }
  Canvas folded = c;
  for (const Stroke& s : strokes)
    folded = render_stroke(folded, s);
  CHECK(render_sequence(c, strokes) == folded);
}

TEST_CASE("PGM round-trip at byte resolution") {
  Canvas c(9, 5);
  Rng rng(123);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 9; ++x)
      c.set(x, y, std::round(rng.uniform01() * 255.0) / 255.0);
  auto path = (std::filesystem::temp_directory_path() / "rp_test_canvas.pgm").string();
  save_pgm(c, path);
  Canvas back = load_pgm(path);
  REQUIRE(back.width() == c.width());
  REQUIRE(back.height() == c.height());
  for (size_t i = 0; i < c.pixels().size(); ++i)
    CHECK(back.pixels()[i] == doctest::Approx(c.pixels()[i]).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("supersampled preview averages down to the canvas resolution") {
  Canvas c(8, 8);
  Stroke s;
  s.x0 = s.x1 = s.x2 = 0.5;
  s.y0 = s.y1 = s.y2 = 0.5;
  s.r0 = s.r1 = 0.2;
  s.g = 0.0;
  Canvas aa = render_sequence_supersampled(c, {&s, 1}, 4);
  CHECK(aa.width() == 8);
  CHECK(aa.height() == 8);
  bool has_partial = false;
  for (double v : aa.pixels())
    if (v > 0.0 && v < 1.0)
      has_partial = true;
  CHECK(has_partial); // edge pixels blend
}

#pragma once

#include <string>
#include <vector>

namespace rp {

// One brushstroke: a quadratic Bezier with linearly interpolated radius
// and a single gray value. Coordinates are fractions of the canvas
// width/height; radii are fractions of the larger canvas dimension.
struct Stroke {
  double x0 = 0, y0 = 0; // start control point
  double x1 = 0, y1 = 0; // middle control point
  double x2 = 0, y2 = 0; // end control point
  double r0 = 0.01;      // start radius, in (0, 0.25]
  double r1 = 0.01;      // end radius, in (0, 0.25]
  double g = 0;          // gray, 0 = black, 1 = white

  bool operator==(const Stroke&) const = default;
};

inline constexpr double kMaxStrokeRadius = 0.25;

struct Vec2 {
  double x = 0, y = 0;
  bool operator==(const Vec2&) const = default;
};

bool stroke_valid(const Stroke& s) noexcept;
void validate_stroke(const Stroke& s); // throws Errc::invalid_argument

// Pulls the middle control point toward the chord midpoint by factor rho,
// damping curvature. rho = 0 is the identity, rho = 1 collapses the curve
// onto its chord.
Stroke restrict_control(const Stroke& s, double rho);

Vec2 eval_point(const Stroke& s, double t);
double eval_radius(const Stroke& s, double t);

// Unit tangent of the Bezier at t; throws Errc::degenerate when the
// derivative vanishes there.
Vec2 eval_tangent(const Stroke& s, double t);

// One JSON object per line, keys x0,y0,x1,y1,x2,y2,r0,r1,g in that order,
// shortest round-trip number form.
std::string stroke_json_line(const Stroke& s);
void save_strokes_jsonl(const std::vector<Stroke>& seq, const std::string& path);
std::vector<Stroke> load_strokes_jsonl(const std::string& path);

} // namespace rp

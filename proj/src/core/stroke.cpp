#include "stroke.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "error.hpp"
#include "textio.hpp"

namespace rp {

namespace {

bool in01(double v) { return v >= 0.0 && v <= 1.0; }

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0))
    fail(Errc::invalid_argument, "curve parameter t must lie in [0,1], got " + fmt_double(t));
}

} // namespace

bool stroke_valid(const Stroke& s) noexcept {
  return in01(s.x0) && in01(s.y0) && in01(s.x1) && in01(s.y1) && in01(s.x2) && in01(s.y2) &&
         s.r0 > 0.0 && s.r0 <= kMaxStrokeRadius && s.r1 > 0.0 && s.r1 <= kMaxStrokeRadius &&
         in01(s.g);
}

void validate_stroke(const Stroke& s) {
  if (!stroke_valid(s))
    fail(Errc::invalid_argument, "stroke violates parameter bounds: " + stroke_json_line(s));
}

Stroke restrict_control(const Stroke& s, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    fail(Errc::invalid_argument, "restriction factor must lie in [0,1], got " + fmt_double(rho));
  Stroke out = s;
  double mx = 0.5 * (s.x0 + s.x2);
  double my = 0.5 * (s.y0 + s.y2);
  // convex-combination form: exact at rho = 0 and rho = 1, clamped so the
  // result never leaves the x1..midpoint span by a rounding ulp
  auto pull = [rho](double from, double to) {
    double v = (1.0 - rho) * from + rho * to;
    return std::clamp(v, std::min(from, to), std::max(from, to));
  };
  out.x1 = pull(s.x1, mx);
  out.y1 = pull(s.y1, my);
  return out;
}

Vec2 eval_point(const Stroke& s, double t) {
  check_t(t);
  double u = 1.0 - t;
  double a = u * u, b = 2.0 * u * t, c = t * t;
  return {a * s.x0 + b * s.x1 + c * s.x2, a * s.y0 + b * s.y1 + c * s.y2};
}

double eval_radius(const Stroke& s, double t) {
  check_t(t);
  return (1.0 - t) * s.r0 + t * s.r1;
}

Vec2 eval_tangent(const Stroke& s, double t) {
  check_t(t);
  double u = 1.0 - t;
  double dx = 2.0 * (u * (s.x1 - s.x0) + t * (s.x2 - s.x1));
  double dy = 2.0 * (u * (s.y1 - s.y0) + t * (s.y2 - s.y1));
  double norm = std::hypot(dx, dy);
  if (norm == 0.0)
    fail(Errc::degenerate, "zero tangent at t=" + fmt_double(t));
  return {dx / norm, dy / norm};
}

std::string stroke_json_line(const Stroke& s) {
  std::string line;
  line.reserve(160);
  line += "{\"x0\":" + fmt_double(s.x0);
  line += ",\"y0\":" + fmt_double(s.y0);
  line += ",\"x1\":" + fmt_double(s.x1);
  line += ",\"y1\":" + fmt_double(s.y1);
  line += ",\"x2\":" + fmt_double(s.x2);
  line += ",\"y2\":" + fmt_double(s.y2);
  line += ",\"r0\":" + fmt_double(s.r0);
  line += ",\"r1\":" + fmt_double(s.r1);
  line += ",\"g\":" + fmt_double(s.g);
  line += "}";
  return line;
}

void save_strokes_jsonl(const std::vector<Stroke>& seq, const std::string& path) {
  std::string out;
  for (const Stroke& s : seq) {
    out += stroke_json_line(s);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<Stroke> load_strokes_jsonl(const std::string& path) {
  std::string text = read_file(path);
  std::vector<Stroke> seq;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": not a JSON object");
    Stroke s;
    try {
      s.x0 = j.at("x0").get<double>();
      s.y0 = j.at("y0").get<double>();
      s.x1 = j.at("x1").get<double>();
      s.y1 = j.at("y1").get<double>();
      s.x2 = j.at("x2").get<double>();
      s.y2 = j.at("y2").get<double>();
      s.r0 = j.at("r0").get<double>();
      s.r1 = j.at("r1").get<double>();
      s.g = j.at("g").get<double>();
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!stroke_valid(s))
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": stroke out of bounds");
    seq.push_back(s);
  }
  return seq;
}

} // namespace rp

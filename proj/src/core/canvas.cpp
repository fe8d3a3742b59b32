#include "canvas.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "textio.hpp"

namespace rp {

Canvas::Canvas(int width, int height, double value) : width_(width), height_(height) {
  if (width <= 0 || height <= 0)
    fail(Errc::invalid_argument, "canvas dimensions must be positive");
  if (!(value >= 0.0 && value <= 1.0))
    fail(Errc::invalid_argument, "canvas intensity must lie in [0,1]");
  pixels_.assign(static_cast<size_t>(width) * height, value);
}

int curve_sample_count(const Stroke& s, int width, int height, double samples_per_px) {
  double w = width, h = height;
  double leg0 = std::hypot((s.x1 - s.x0) * w, (s.y1 - s.y0) * h);
  double leg1 = std::hypot((s.x2 - s.x1) * w, (s.y2 - s.y1) * h);
  double polygon_px = leg0 + leg1;
  // |B'(t)| <= 2 * polygon length, so n intervals keep arc gaps below
  // 2 * polygon / n <= 1 / samples_per_px
  double intervals = std::ceil(2.0 * samples_per_px * polygon_px);
  return 2 + static_cast<int>(std::min(intervals, 1e7));
}

void render_stroke_in_place(Canvas& c, const Stroke& s, double samples_per_px) {
  validate_stroke(s);
  if (!(samples_per_px > 0.0))
    fail(Errc::invalid_argument, "sampling density must be positive");
  const int w = c.width(), h = c.height();
  const double dim = std::max(w, h);
  const int n = curve_sample_count(s, w, h, samples_per_px);
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / (n - 1);
    Vec2 p = eval_point(s, t);
    double cx = p.x * w;
    double cy = p.y * h;
    double rad = eval_radius(s, t) * dim;
    int x_lo = std::max(0, static_cast<int>(std::floor(cx - rad - 0.5)));
    int x_hi = std::min(w - 1, static_cast<int>(std::ceil(cx + rad - 0.5)));
    int y_lo = std::max(0, static_cast<int>(std::floor(cy - rad - 0.5)));
    int y_hi = std::min(h - 1, static_cast<int>(std::ceil(cy + rad - 0.5)));
    double r2 = rad * rad;
    for (int y = y_lo; y <= y_hi; ++y) {
      double dy = (y + 0.5) - cy;
      for (int x = x_lo; x <= x_hi; ++x) {
        double dx = (x + 0.5) - cx;
        if (dx * dx + dy * dy <= r2)
          c.set(x, y, s.g);
      }
    }
  }
}

Canvas render_stroke(const Canvas& c, const Stroke& s, double samples_per_px) {
  Canvas out = c;
  render_stroke_in_place(out, s, samples_per_px);
  return out;
}

Canvas render_sequence(const Canvas& c, std::span<const Stroke> seq, double samples_per_px) {
  Canvas out = c;
  for (const Stroke& s : seq)
    render_stroke_in_place(out, s, samples_per_px);
  return out;
}

Canvas render_sequence_supersampled(const Canvas& c, std::span<const Stroke> seq, int factor,
                                    double samples_per_px) {
  if (factor < 1)
    fail(Errc::invalid_argument, "supersampling factor must be >= 1");
  if (factor == 1)
    return render_sequence(c, seq, samples_per_px);
  const int w = c.width(), h = c.height();
  Canvas big(w * factor, h * factor);
  for (int y = 0; y < h * factor; ++y)
    for (int x = 0; x < w * factor; ++x)
      big.set(x, y, c.at(x / factor, y / factor));
  big = render_sequence(big, seq, samples_per_px);
  Canvas out(w, h);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int sy = 0; sy < factor; ++sy)
        for (int sx = 0; sx < factor; ++sx)
          acc += big.at(x * factor + sx, y * factor + sy);
      out.set(x, y, acc * inv);
    }
  }
  return out;
}

double mse(const Canvas& a, const Canvas& b) {
  if (a.width() != b.width() || a.height() != b.height())
    fail(Errc::shape_mismatch, "canvas dimensions differ");
  auto pa = a.pixels();
  auto pb = b.pixels();
  double acc = 0.0;
  for (size_t i = 0; i < pa.size(); ++i) {
    double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

Canvas load_pgm(const std::string& path) {
  std::string raw = read_file(path);
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < raw.size()) {
      if (std::isspace(static_cast<unsigned char>(raw[pos]))) {
        ++pos;
      } else if (raw[pos] == '#') {
        while (pos < raw.size() && raw[pos] != '\n')
          ++pos;
      } else {
        break;
      }
    }
    size_t start = pos;
    while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos])))
      ++pos;
    if (start == pos)
      fail(Errc::parse, path + ": truncated PGM header");
    return raw.substr(start, pos - start);
  };
  if (next_token() != "P5")
    fail(Errc::parse, path + ": not a binary PGM (P5)");
  long w = parse_long(next_token());
  long h = parse_long(next_token());
  long maxval = parse_long(next_token());
  if (w <= 0 || h <= 0)
    fail(Errc::parse, path + ": bad PGM dimensions");
  if (maxval != 255)
    fail(Errc::parse, path + ": expected maxval 255, got " + std::to_string(maxval));
  ++pos; // single whitespace after maxval
  size_t need = static_cast<size_t>(w) * static_cast<size_t>(h);
  if (raw.size() - pos < need)
    fail(Errc::parse, path + ": truncated PGM pixel data");
  Canvas c(static_cast<int>(w), static_cast<int>(h));
  auto px = c.pixels();
  for (size_t i = 0; i < need; ++i)
    px[i] = static_cast<unsigned char>(raw[pos + i]) / 255.0;
  return c;
}

void save_pgm(const Canvas& c, const std::string& path) {
  if (c.width() <= 0 || c.height() <= 0)
    fail(Errc::invalid_argument, "cannot save an empty canvas");
  std::string out = "P5\n" + std::to_string(c.width()) + " " + std::to_string(c.height()) + "\n255\n";
  out.reserve(out.size() + c.pixels().size());
  for (double v : c.pixels()) {
    long byte = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(byte)));
  }
  write_file(path, out);
}

} // namespace rp

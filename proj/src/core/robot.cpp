#include "robot.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "textio.hpp"

namespace rp {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;
constexpr int kArcTableSize = 2048;

double wrap_deg(double a) {
  double w = std::fmod(a + 180.0, 360.0);
  if (w < 0)
    w += 360.0;
  return w - 180.0;
}

struct MmCurve {
  const Stroke& s;
  const CanvasFrame& f;

  Vec2 point(double t) const {
    Vec2 p = eval_point(s, t);
    return {f.origin_x + p.x * f.width_mm, f.origin_y + p.y * f.height_mm};
  }
  // mm-space tangent; the frame scales x and y independently, so the
  // normalized-space tangent cannot be reused as-is
  Vec2 tangent(double t) const {
    double u = 1.0 - t;
    double dx = 2.0 * (u * (s.x1 - s.x0) + t * (s.x2 - s.x1)) * f.width_mm;
    double dy = 2.0 * (u * (s.y1 - s.y0) + t * (s.y2 - s.y1)) * f.height_mm;
    double norm = std::hypot(dx, dy);
    if (norm == 0.0)
      fail(Errc::degenerate, "stroke with vanishing tangent");
    return {dx / norm, dy / norm};
  }
};

double palette_width_mm(double r0, double r1, const CanvasFrame& f) {
  return (r0 + r1) * std::max(f.width_mm, f.height_mm);
}

} // namespace

void validate_frame(const CanvasFrame& f) {
  if (!(f.width_mm > 0.0) || !(f.height_mm > 0.0))
    fail(Errc::invalid_argument, "canvas frame must have positive extent");
  if (!(f.z_travel > f.z_contact))
    fail(Errc::invalid_argument, "z_travel must sit above z_contact");
  if (!(f.step_mm > 0.0))
    fail(Errc::invalid_argument, "step_mm must be positive");
}

std::vector<TargetPose> stroke_to_poses(const Stroke& s, const CanvasFrame& frame,
                                        const Palette& palette, double step_mm) {
  validate_stroke(s);
  validate_frame(frame);
  if (!(step_mm > 0.0))
    fail(Errc::invalid_argument, "step_mm must be positive");
  if (palette.thicknesses.empty())
    fail(Errc::invalid_argument, "palette has no thickness classes");
  if (thickness_index(palette, s.r0, s.r1) < 0)
    fail(Errc::unquantized_input, "stroke thickness is not a palette centroid");

  MmCurve curve{s, frame};

  // cumulative chord-length table, linearly inverted for arc positions
  std::vector<double> arc(kArcTableSize + 1, 0.0);
  Vec2 prev = curve.point(0.0);
  for (int i = 1; i <= kArcTableSize; ++i) {
    Vec2 p = curve.point(static_cast<double>(i) / kArcTableSize);
    arc[i] = arc[i - 1] + std::hypot(p.x - prev.x, p.y - prev.y);
    prev = p;
  }
  const double total = arc.back();

  double w_max = 0.0;
  for (const auto& th : palette.thicknesses)
    w_max = std::max(w_max, palette_width_mm(th[0], th[1], frame));
  double w_target = palette_width_mm(s.r0, s.r1, frame);
  double theta_deg = std::acos(std::clamp(w_target / w_max, 0.0, 1.0)) * kRadToDeg;

  int n = std::max(2, 1 + static_cast<int>(std::llround(total / step_mm)));
  std::vector<TargetPose> poses;
  poses.reserve(n);
  int seg = 0;
  for (int i = 0; i < n; ++i) {
    double target_arc = total * static_cast<double>(i) / (n - 1);
    while (seg < kArcTableSize - 1 && arc[seg + 1] < target_arc)
      ++seg;
    double span = arc[seg + 1] - arc[seg];
    double frac = span > 0.0 ? (target_arc - arc[seg]) / span : 0.0;
    double t = (seg + std::clamp(frac, 0.0, 1.0)) / kArcTableSize;
    Vec2 p = curve.point(t);
    Vec2 tan = curve.tangent(t);
    double perp_deg = std::atan2(tan.y, tan.x) * kRadToDeg + 90.0;
    poses.push_back({p.x, p.y, frame.z_contact, wrap_deg(perp_deg - theta_deg)});
  }
  return poses;
}

RobotProgram build_program(const std::vector<Stroke>& seq, const CanvasFrame& frame,
                           const Palette& palette) {
  validate_frame(frame);
  RobotProgram prog;
  int prev_gray = -1;
  for (size_t i = 0; i < seq.size(); ++i) {
    const Stroke& s = seq[i];
    int gray = gray_index(palette, s.g);
    if (gray < 0)
      fail(Errc::unquantized_input, "stroke " + std::to_string(i) + " gray is not in the palette");
    if (prev_gray >= 0 && gray != prev_gray) {
      prog.actions.push_back({Action::Kind::Clean, {}, 0});
      prog.actions.push_back({Action::Kind::Dry, {}, 0});
    }
    prog.actions.push_back({Action::Kind::Dip, {}, gray});
    prev_gray = gray;

    std::vector<TargetPose> poses = stroke_to_poses(s, frame, palette, frame.step_mm);
    prog.actions.push_back({Action::Kind::StrokeBegin, {}, static_cast<int>(i)});
    TargetPose entry = poses.front();
    entry.z = frame.z_travel;
    prog.actions.push_back({Action::Kind::Move, entry, 0});
    for (const TargetPose& p : poses)
      prog.actions.push_back({Action::Kind::Move, p, 0});
    TargetPose exit = poses.back();
    exit.z = frame.z_travel;
    prog.actions.push_back({Action::Kind::Move, exit, 0});
    prog.actions.push_back({Action::Kind::StrokeEnd, {}, static_cast<int>(i)});
  }
  return prog;
}

RobotProgram motion_to_program(const MotionSample& m, const CanvasFrame& frame) {
  validate_frame(frame);
  for (const auto& row : m.rows)
    for (double v : row)
      if (!std::isfinite(v))
        fail(Errc::invalid_argument, "motion sample contains non-finite values");

  const double cx = frame.origin_x + frame.width_mm / 2.0;
  const double cy = frame.origin_y + frame.height_mm / 2.0;
  RobotProgram prog;
  prog.actions.push_back({Action::Kind::StrokeBegin, {}, 0});
  for (int i = 0; i < kMotionLen; ++i) {
    TargetPose pose;
    // clamp into the frame rectangle; replayed data must never send the
    // arm outside the calibrated surface
    pose.x = std::clamp(cx + m.rows[0][i], frame.origin_x, frame.origin_x + frame.width_mm);
    pose.y = std::clamp(cy + m.rows[1][i], frame.origin_y, frame.origin_y + frame.height_mm);
    pose.z = frame.z_contact + m.rows[2][i];
    pose.yaw = wrap_deg(m.rows[3][i]); // pitch and roll stay horizontal
    prog.actions.push_back({Action::Kind::Move, pose, 0});
  }
  prog.actions.push_back({Action::Kind::StrokeEnd, {}, 0});
  return prog;
}

std::string emit(const RobotProgram& p) {
  std::string out;
  out.reserve(p.actions.size() * 40);
  for (const Action& a : p.actions) {
    switch (a.kind) {
    case Action::Kind::Move:
      out += "MOVE " + fmt_fixed(a.pose.x, 3) + ' ' + fmt_fixed(a.pose.y, 3) + ' ' +
             fmt_fixed(a.pose.z, 3) + ' ' + fmt_fixed(a.pose.yaw, 3);
      break;
    case Action::Kind::Dip:
      out += "DIP " + std::to_string(a.index);
      break;
    case Action::Kind::Clean:
      out += "CLEAN";
      break;
    case Action::Kind::Dry:
      out += "DRY";
      break;
    case Action::Kind::StrokeBegin:
      out += "STROKE_BEGIN " + std::to_string(a.index);
      break;
    case Action::Kind::StrokeEnd:
      out += "STROKE_END " + std::to_string(a.index);
      break;
    }
    out += '\n';
  }
  return out;
}

RobotProgram parse_program(const std::string& text) {
  RobotProgram prog;
  size_t lineno = 0;
  for (std::string_view rest = text; !rest.empty();) {
    size_t nl = rest.find('\n');
    std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++lineno;
    if (line.empty())
      continue;
    auto tokens = split(line, ' ');
    auto want = [&](size_t n) {
      if (tokens.size() != n)
        fail(Errc::parse, "line " + std::to_string(lineno) + ": expected " + std::to_string(n) +
                              " tokens");
    };
    Action a;
    if (tokens[0] == "MOVE") {
      want(5);
      a.kind = Action::Kind::Move;
      a.pose = {parse_double(tokens[1]), parse_double(tokens[2]), parse_double(tokens[3]),
                parse_double(tokens[4])};
    } else if (tokens[0] == "DIP") {
      want(2);
      a.kind = Action::Kind::Dip;
      a.index = static_cast<int>(parse_long(tokens[1]));
    } else if (tokens[0] == "CLEAN") {
      want(1);
      a.kind = Action::Kind::Clean;
    } else if (tokens[0] == "DRY") {
      want(1);
      a.kind = Action::Kind::Dry;
    } else if (tokens[0] == "STROKE_BEGIN") {
      want(2);
      a.kind = Action::Kind::StrokeBegin;
      a.index = static_cast<int>(parse_long(tokens[1]));
    } else if (tokens[0] == "STROKE_END") {
      want(2);
      a.kind = Action::Kind::StrokeEnd;
      a.index = static_cast<int>(parse_long(tokens[1]));
    } else {
      fail(Errc::parse, "line " + std::to_string(lineno) + ": unknown action '" +
                            std::string(tokens[0]) + "'");
    }
    prog.actions.push_back(a);
  }
  return prog;
}

void save_program(const RobotProgram& p, const std::string& path) { write_file(path, emit(p)); }

RobotProgram load_program(const std::string& path) { return parse_program(read_file(path)); }

void validate_program(const RobotProgram& p, const CanvasFrame& frame) {
  validate_frame(frame);
  int open = -1;
  int next_index = 0;
  const double eps = 1e-3; // emitted coordinates carry three decimals
  for (size_t i = 0; i < p.actions.size(); ++i) {
    const Action& a = p.actions[i];
    switch (a.kind) {
    case Action::Kind::StrokeBegin:
      if (open >= 0)
        fail(Errc::parse, "nested STROKE_BEGIN at action " + std::to_string(i));
      if (a.index != next_index)
        fail(Errc::parse, "stroke indices must run 0..n-1 in order");
      open = a.index;
      break;
    case Action::Kind::StrokeEnd:
      if (open != a.index)
        fail(Errc::parse, "STROKE_END " + std::to_string(a.index) + " without matching begin");
      open = -1;
      ++next_index;
      break;
    case Action::Kind::Move:
      if (a.pose.z < frame.z_travel - eps && open < 0)
        fail(Errc::parse, "contact-height MOVE outside a stroke at action " + std::to_string(i));
      if (a.pose.x < frame.origin_x - eps || a.pose.x > frame.origin_x + frame.width_mm + eps ||
          a.pose.y < frame.origin_y - eps || a.pose.y > frame.origin_y + frame.height_mm + eps)
        fail(Errc::parse, "MOVE leaves the canvas frame at action " + std::to_string(i));
      break;
    default:
      break;
    }
  }
  if (open >= 0)
    fail(Errc::parse, "unterminated stroke " + std::to_string(open));
}

} // namespace rp

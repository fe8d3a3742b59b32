#pragma once

#include <string>
#include <vector>

#include "mocap.hpp"
#include "quantize.hpp"
#include "stroke.hpp"

namespace rp {

// Physical placement of the painting surface in the robot work frame,
// millimeters. The tool axis stays vertical; motion happens at z_contact
// (bristles on paper) or z_travel (safe hover).
struct CanvasFrame {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double width_mm = 200.0;
  double height_mm = 200.0;
  double z_contact = 0.0;
  double z_travel = 20.0;
  double step_mm = 2.0; // pose spacing along a stroke
};

void validate_frame(const CanvasFrame& f);

// Horizontal target pose: position plus yaw about the vertical axis.
struct TargetPose {
  double x = 0, y = 0, z = 0, yaw = 0;
  bool operator==(const TargetPose&) const = default;
};

struct Action {
  enum class Kind { Move, Dip, Clean, Dry, StrokeBegin, StrokeEnd };
  Kind kind = Kind::Move;
  TargetPose pose; // Move only
  int index = 0;   // Dip: palette color, StrokeBegin/End: stroke number
  bool operator==(const Action&) const = default;
};

struct RobotProgram {
  std::vector<Action> actions;
  bool operator==(const RobotProgram&) const = default;
};

// Samples the stroke at approximately uniform arc-length spacing. Yaw is
// perpendicular to the travel direction plus a rotation that narrows the
// effective footprint: theta = arccos(width / widest palette width), so
// the widest class paints with the brush square to the path and thinner
// classes rotate toward it.
std::vector<TargetPose> stroke_to_poses(const Stroke& s, const CanvasFrame& frame,
                                        const Palette& palette, double step_mm);

// Full painting program: strokes in order, a dip before every stroke,
// clean + dry inserted whenever the gray changes, travel-height entry and
// exit moves around each stroke's contact poses.
RobotProgram build_program(const std::vector<Stroke>& seq, const CanvasFrame& frame,
                           const Palette& palette);

// Replay of one captured motion sample: a single begin/end pair holding
// one move per time step, positions offset to the frame center, pitch and
// roll dropped to keep poses horizontal.
RobotProgram motion_to_program(const MotionSample& m, const CanvasFrame& frame);

// One action per line, three fixed decimals, '\n' terminated:
//   MOVE <x> <y> <z> <yaw> | DIP <i> | CLEAN | DRY |
//   STROKE_BEGIN <i> | STROKE_END <i>
std::string emit(const RobotProgram& p);
RobotProgram parse_program(const std::string& text);

void save_program(const RobotProgram& p, const std::string& path);
RobotProgram load_program(const std::string& path);

// Structural checks: matched begin/end pairs in input order, contact-depth
// moves only inside a stroke, positions inside the frame rectangle.
void validate_program(const RobotProgram& p, const CanvasFrame& frame);

} // namespace rp

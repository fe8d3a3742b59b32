#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rp {

// One motion-capture frame of the brush tip, millimeters and degrees.
struct MocapFrame {
  long frame = 0;
  double time_s = 0;
  double x = 0, y = 0, z = 0;
  double yaw = 0, pitch = 0, roll = 0;
};

inline constexpr int kMotionLen = 60;

// Fixed-length pose trajectory: rows x, y, z, yaw, pitch, roll over
// kMotionLen steps, plus provenance metadata.
struct MotionSample {
  std::array<std::array<double, kMotionLen>, 6> rows{};
  std::string sheet;
  int cell = -1;
  long frame_begin = 0;
  long frame_end = 0;
};

// Offset from the marker-centroid frame to the brush tip, plus the
// reference triangle the offset was measured against.
struct MarkerCalibration {
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::array<Eigen::Vector3d, 3> reference{};
  bool has_reference = false; // when false, the first stream frame is adopted
};

// Rigid-body pose from a marker triangle: orientation relative to the
// calibration reference (Gram-Schmidt frames), tip = centroid + R * offset,
// Euler angles in Z-Y-X (yaw-pitch-roll) order, degrees.
MocapFrame derive_tip_pose(const std::array<Eigen::Vector3d, 3>& markers,
                           const MarkerCalibration& cal);

// CSV with header `frame,time,x,y,z,yaw,pitch,roll` (pre-derived poses) or
// `frame,time,m1x,m1y,m1z,...,m3z` (raw marker positions, converted via
// the calibration). Schema is picked from the header.
std::vector<MocapFrame> parse_mocap_csv(const std::string& path, MarkerCalibration cal = {});

// Maximal runs with z strictly below z_cut, temporal order preserved.
std::vector<std::vector<MocapFrame>> segment_by_z(std::span<const MocapFrame> frames,
                                                  double z_cut);

// Translates x,y by -center; z and angles untouched.
void center_segment(std::vector<MocapFrame>& seg, double center_x, double center_y);

struct FilterVerdict {
  bool accept = true;
  std::string reason;
};

// Rejects segments that are too short, contain non-finite values, or jump
// more than max_jump_mm between consecutive frames.
FilterVerdict quality_filter(std::span<const MocapFrame> seg, int min_frames = 10,
                             double max_jump_mm = 50.0);

// Length-n segment to exactly `len` steps: identity copy at n == len,
// round(i*(n-1)/(len-1)) subsampling above, tail padding below.
MotionSample resample_fixed(std::span<const MocapFrame> seg, int len = kMotionLen);

// JSON Lines, one object per sample: sheet, cell, frames, then the 6 x len
// array flattened row-major.
void save_samples_jsonl(const std::vector<MotionSample>& samples, const std::string& path);
std::vector<MotionSample> load_samples_jsonl(const std::string& path);

} // namespace rp

#include "mocap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "error.hpp"
#include "textio.hpp"

namespace rp {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

// Orthonormal frame of a marker triangle: origin at the centroid, X along
// the first edge, Y the Gram-Schmidt remainder of the second edge.
struct TriangleFrame {
  Eigen::Vector3d centroid;
  Eigen::Matrix3d rotation;
};

TriangleFrame triangle_frame(const std::array<Eigen::Vector3d, 3>& m) {
  Eigen::Vector3d e1 = m[1] - m[0];
  Eigen::Vector3d e2 = m[2] - m[0];
  double n1 = e1.norm();
  if (n1 < 1e-12)
    fail(Errc::degenerate, "coincident markers");
  Eigen::Vector3d x = e1 / n1;
  Eigen::Vector3d y = e2 - e2.dot(x) * x;
  double n2 = y.norm();
  if (n2 < 1e-12)
    fail(Errc::degenerate, "collinear markers");
  y /= n2;
  Eigen::Vector3d z = x.cross(y);
  TriangleFrame f;
  f.centroid = (m[0] + m[1] + m[2]) / 3.0;
  f.rotation.col(0) = x;
  f.rotation.col(1) = y;
  f.rotation.col(2) = z;
  return f;
}

bool frame_finite(const MocapFrame& f) {
  return std::isfinite(f.time_s) && std::isfinite(f.x) && std::isfinite(f.y) &&
         std::isfinite(f.z) && std::isfinite(f.yaw) && std::isfinite(f.pitch) &&
         std::isfinite(f.roll);
}

} // namespace

MocapFrame derive_tip_pose(const std::array<Eigen::Vector3d, 3>& markers,
                           const MarkerCalibration& cal) {
  TriangleFrame cur = triangle_frame(markers);
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  if (cal.has_reference) {
    TriangleFrame ref = triangle_frame(cal.reference);
    rot = cur.rotation * ref.rotation.transpose();
  } else {
    rot = cur.rotation;
  }
  Eigen::Vector3d tip = cur.centroid + rot * cal.offset;

  MocapFrame out;
  out.x = tip.x();
  out.y = tip.y();
  out.z = tip.z();
  // Z-Y-X intrinsic: R = Rz(yaw) Ry(pitch) Rx(roll)
  out.yaw = std::atan2(rot(1, 0), rot(0, 0)) * kRadToDeg;
  out.pitch = std::asin(std::clamp(-rot(2, 0), -1.0, 1.0)) * kRadToDeg;
  out.roll = std::atan2(rot(2, 1), rot(2, 2)) * kRadToDeg;
  return out;
}

std::vector<MocapFrame> parse_mocap_csv(const std::string& path, MarkerCalibration cal) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    fail(Errc::parse, path + ": empty mocap stream");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();

  const std::string pose_header = "frame,time,x,y,z,yaw,pitch,roll";
  const std::string marker_header = "frame,time,m1x,m1y,m1z,m2x,m2y,m2z,m3x,m3y,m3z";
  bool raw_markers;
  if (line == pose_header)
    raw_markers = false;
  else if (line == marker_header)
    raw_markers = true;
  else
    fail(Errc::parse, path + ": unrecognized header '" + line + "'");

  std::vector<MocapFrame> frames;
  size_t lineno = 1;
  double prev_time = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto cells = split(line, ',');
    const size_t expect = raw_markers ? 11 : 8;
    if (cells.size() != expect)
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(expect) + " columns");
    MocapFrame f;
    f.frame = parse_long(cells[0]);
    f.time_s = parse_double(cells[1]);
    if (raw_markers) {
      std::array<Eigen::Vector3d, 3> m;
      for (int i = 0; i < 3; ++i)
        m[i] = {parse_double(cells[2 + 3 * i]), parse_double(cells[3 + 3 * i]),
                parse_double(cells[4 + 3 * i])};
      if (!cal.has_reference) {
        cal.reference = m;
        cal.has_reference = true;
      }
      MocapFrame pose = derive_tip_pose(m, cal);
      f.x = pose.x;
      f.y = pose.y;
      f.z = pose.z;
      f.yaw = pose.yaw;
      f.pitch = pose.pitch;
      f.roll = pose.roll;
    } else {
      f.x = parse_double(cells[2]);
      f.y = parse_double(cells[3]);
      f.z = parse_double(cells[4]);
      f.yaw = parse_double(cells[5]);
      f.pitch = parse_double(cells[6]);
      f.roll = parse_double(cells[7]);
    }
    if (!(f.time_s > prev_time))
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": time must strictly increase");
    prev_time = f.time_s;
    frames.push_back(f);
  }
  return frames;
}

std::vector<std::vector<MocapFrame>> segment_by_z(std::span<const MocapFrame> frames,
                                                  double z_cut) {
  std::vector<std::vector<MocapFrame>> segments;
  std::vector<MocapFrame> run;
  for (const MocapFrame& f : frames) {
    if (f.z < z_cut) {
      run.push_back(f);
    } else if (!run.empty()) {
      segments.push_back(std::move(run));
      run.clear();
    }
  }
  if (!run.empty())
    segments.push_back(std::move(run));
  return segments;
}

void center_segment(std::vector<MocapFrame>& seg, double center_x, double center_y) {
  for (MocapFrame& f : seg) {
    f.x -= center_x;
    f.y -= center_y;
  }
}

FilterVerdict quality_filter(std::span<const MocapFrame> seg, int min_frames,
                             double max_jump_mm) {
  if (seg.size() < static_cast<size_t>(min_frames))
    return {false, "too short: " + std::to_string(seg.size()) + " < " +
                       std::to_string(min_frames) + " frames"};
  for (size_t i = 0; i < seg.size(); ++i) {
    if (!frame_finite(seg[i]))
      return {false, "non-finite value at segment frame " + std::to_string(i)};
    if (i > 0) {
      double jump = std::hypot(seg[i].x - seg[i - 1].x, seg[i].y - seg[i - 1].y,
                               seg[i].z - seg[i - 1].z);
      if (jump > max_jump_mm)
        return {false, "position jump " + fmt_double(jump) + " mm at segment frame " +
                           std::to_string(i)};
    }
  }
  return {true, ""};
}

MotionSample resample_fixed(std::span<const MocapFrame> seg, int len) {
  if (seg.empty())
    fail(Errc::invalid_argument, "cannot resample an empty segment");
  if (len != kMotionLen) // the sample type is fixed 6 x 60
    fail(Errc::invalid_argument, "sample length must be " + std::to_string(kMotionLen));
  const long n = static_cast<long>(seg.size());
  MotionSample out;
  auto put = [&](int col, const MocapFrame& f) {
    out.rows[0][col] = f.x;
    out.rows[1][col] = f.y;
    out.rows[2][col] = f.z;
    out.rows[3][col] = f.yaw;
    out.rows[4][col] = f.pitch;
    out.rows[5][col] = f.roll;
  };
  if (n >= len) {
    for (int i = 0; i < len; ++i) {
      long idx = n == len ? i
                          : std::llround(static_cast<double>(i) * static_cast<double>(n - 1) /
                                         static_cast<double>(len - 1));
      put(i, seg[static_cast<size_t>(idx)]);
    }
  } else {
    for (int i = 0; i < len; ++i)
      put(i, seg[std::min<size_t>(i, seg.size() - 1)]);
  }
  out.frame_begin = seg.front().frame;
  out.frame_end = seg.back().frame;
  return out;
}

void save_samples_jsonl(const std::vector<MotionSample>& samples, const std::string& path) {
  std::string out;
  for (const MotionSample& s : samples) {
    out += "{\"sheet\":" + nlohmann::json(s.sheet).dump();
    out += ",\"cell\":" + std::to_string(s.cell);
    out += ",\"frames\":[" + std::to_string(s.frame_begin) + ',' + std::to_string(s.frame_end) +
           "],\"data\":[";
    bool first = true;
    for (const auto& row : s.rows)
      for (double v : row) {
        if (!first)
          out += ',';
        out += fmt_double(v);
        first = false;
      }
    out += "]}\n";
  }
  write_file(path, out);
}

std::vector<MotionSample> load_samples_jsonl(const std::string& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<MotionSample> samples;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": not a JSON object");
    MotionSample s;
    try {
      s.sheet = j.at("sheet").get<std::string>();
      s.cell = j.at("cell").get<int>();
      s.frame_begin = j.at("frames").at(0).get<long>();
      s.frame_end = j.at("frames").at(1).get<long>();
      const auto& data = j.at("data");
      if (data.size() != 6 * kMotionLen)
        fail(Errc::parse, path + ":" + std::to_string(lineno) + ": sample must hold " +
                              std::to_string(6 * kMotionLen) + " values");
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < kMotionLen; ++c)
          s.rows[r][c] = data[r * kMotionLen + c].get<double>();
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

} // namespace rp

//------------------------------------------------------------------------------
//
//   Copyright 2026 The finemotion Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "finemotion/kinematics.hpp"

#include "finemotion/error.hpp"
#include "finemotion/text.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace finemotion::kin {
namespace {

constexpr std::string_view kMarkerLabels[kMarkerCount] = {
    "f11", "f12", "f13", "f14", "f21", "f22", "f23", "f24", "f31", "f32", "f33", "f34",
    "f41", "f42", "f43", "f44", "t3",  "t4",  "t5",  "t6",  "t7",  "e1",  "e2"};

constexpr std::string_view kJointNames[kJointCount] = {
    "J1_1", "J1_2", "J2_1", "J2_2", "J2_3", "J3_1", "J3_2", "J3_3", "J4_1",
    "J4_2", "J4_3", "J5_1", "J5_2", "J5_3", "Jw_r", "Jw_p", "Jw_y"};

std::string label(Marker m)
{
  return std::string(marker_label(m));
}

}  // namespace

Vec3 vector_between(Vec3 const &a, Vec3 const &b)
{
  return {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
}

double dot(Vec3 const &a, Vec3 const &b)
{
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 cross(Vec3 const &a, Vec3 const &b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(Vec3 const &a)
{
  return std::hypot(a[0], a[1], a[2]);
}

Vec3 normalized(Vec3 const &a)
{
  double const n = norm(a);
  if (n <= kDegenerate)
  {
    throw Error("degenerate", "cannot normalize a zero-length vector");
  }
  return {a[0] / n, a[1] / n, a[2] / n};
}

double angle_between(Vec3 const &u, Vec3 const &v, std::string_view what)
{
  if (norm(u) <= kDegenerate || norm(v) <= kDegenerate)
  {
    throw Error("degenerate", "zero-length vector in angle between " + std::string(what));
  }
  return std::atan2(norm(cross(u, v)), dot(u, v));
}

Vec3 palm_normal(Vec3 const &f11, Vec3 const &f41, Vec3 const &t4)
{
  Vec3 const n = cross(vector_between(f11, f41), vector_between(f11, t4));
  // |n| is twice the triangle area
  if (0.5 * norm(n) <= kDegenerate)
  {
    throw Error("degenerate", "palm markers f11, f41, t4 are collinear");
  }
  return normalized(n);
}

std::string_view marker_label(Marker m)
{
  return kMarkerLabels[static_cast<std::size_t>(m)];
}

Marker parse_marker(std::string_view text)
{
  for (std::size_t i = 0; i < kMarkerCount; ++i)
  {
    if (kMarkerLabels[i] == text)
    {
      return static_cast<Marker>(i);
    }
  }
  throw Error("parse", "unknown marker label '" + std::string(text) + "'");
}

Marker finger_marker(std::size_t ray, std::size_t j)
{
  if (ray < 1 || ray > 4 || j < 1 || j > 4)
  {
    throw Error("range", "finger marker f" + std::to_string(ray) + std::to_string(j) + " does not exist");
  }
  return static_cast<Marker>(4 * (ray - 1) + (j - 1));
}

Vec3 const &MarkerFrame::at(Marker m) const
{
  auto const i = static_cast<std::size_t>(m);
  if (!present[i])
  {
    throw Error("missing", "marker '" + label(m) + "' absent at t=" + format_double(time));
  }
  return positions[i];
}

std::string_view joint_name(std::size_t index)
{
  if (index >= kJointCount)
  {
    throw Error("range", "joint index " + std::to_string(index) + " out of range");
  }
  return kJointNames[index];
}

Configuration extract_configuration(MarkerFrame const &frame, AnchorTable const &anchors)
{
  auto angle_at = [&](Marker at, Marker a, Marker b) {
    Vec3 const &p = frame.at(at);
    return angle_between(vector_between(p, frame.at(a)), vector_between(p, frame.at(b)),
                         label(at) + "->" + label(a) + ", " + label(at) + "->" + label(b));
  };

  Configuration x{};
  for (std::size_t ray = 1; ray <= 4; ++ray)
  {
    Marker const mp  = finger_marker(ray, 1);
    Marker const pip = finger_marker(ray, 2);
    Marker const dip = finger_marker(ray, 3);
    Marker const tip = finger_marker(ray, 4);
    x[finger_joint(ray, 1)] = angle_at(mp, anchors[ray - 1], pip);
    x[finger_joint(ray, 2)] = angle_at(pip, mp, dip);
    x[finger_joint(ray, 3)] = angle_at(dip, pip, tip);
  }

  Vec3 const normal = palm_normal(frame.at(Marker::f11), frame.at(Marker::f41), frame.at(Marker::t4));
  x[kThumbIp]       = angle_at(Marker::t6, Marker::t7, Marker::t5);
  x[kThumbMp]       = angle_between(vector_between(frame.at(Marker::t5), frame.at(Marker::t6)), normal,
                                    "t5->t6, palm normal");

  Vec3 const forearm = vector_between(frame.at(Marker::t4), frame.at(Marker::t3));
  x[kWristPitch]     = angle_between(normal, forearm, "palm normal, t4->t3");
  x[kWristYaw]       = angle_between(vector_between(frame.at(Marker::f41), frame.at(Marker::f11)), forearm,
                                     "f41->f11, t4->t3");
  x[kWristRoll]      = angle_between(normal, vector_between(frame.at(Marker::e1), frame.at(Marker::e2)),
                                     "palm normal, e1->e2");
  return x;
}

std::array<double, kJointCount> normalize_configuration(Configuration const &x)
{
  std::array<double, kJointCount> out{};
  for (std::size_t i = 0; i < kJointCount; ++i)
  {
    if (!(x[i] >= 0.0 && x[i] <= std::numbers::pi))
    {
      throw Error("range", "joint " + std::string(kJointNames[i]) + " = " + format_double(x[i]) +
                               " lies outside [0, pi]");
    }
    out[i] = x[i] / std::numbers::pi;
  }
  return out;
}

Configuration denormalize_configuration(std::array<double, kJointCount> const &values)
{
  Configuration x{};
  for (std::size_t i = 0; i < kJointCount; ++i)
  {
    x[i] = values[i] * std::numbers::pi;
  }
  return x;
}

Vec3 RigidTransform::apply(Vec3 const &p) const
{
  auto const &r = rotation;
  return {r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + translation[0],
          r[3] * p[0] + r[4] * p[1] + r[5] * p[2] + translation[1],
          r[6] * p[0] + r[7] * p[1] + r[8] * p[2] + translation[2]};
}

RigidTransform rigid_from_quaternion(double w, double x, double y, double z, Vec3 const &translation)
{
  double const n = std::sqrt(w * w + x * x + y * y + z * z);
  if (n <= kDegenerate)
  {
    throw Error("degenerate", "zero quaternion");
  }
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  RigidTransform t;
  t.rotation    = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
                   2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
                   2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  t.translation = translation;
  return t;
}

MarkerFrame transformed(MarkerFrame const &frame, RigidTransform const &transform)
{
  MarkerFrame out = frame;
  for (std::size_t i = 0; i < kMarkerCount; ++i)
  {
    if (frame.present[i])
    {
      out.positions[i] = transform.apply(frame.positions[i]);
    }
  }
  return out;
}

void write_marker_csv(std::ostream &out, std::vector<MarkerFrame> const &frames)
{
  out << "time_s";
  for (auto const &l : kMarkerLabels)
  {
    out << ',' << l << "_x," << l << "_y," << l << "_z";
  }
  out << '\n';
  for (auto const &f : frames)
  {
    out << format_double(f.time);
    for (std::size_t i = 0; i < kMarkerCount; ++i)
    {
      if (!f.present[i])
      {
        out << ",,,";
        continue;
      }
      for (double c : f.positions[i])
      {
        out << ',' << format_double(c);
      }
    }
    out << '\n';
  }
}

std::vector<MarkerFrame> read_marker_csv(std::istream &in)
{
  std::string line;
  if (!read_line(in, line))
  {
    throw Error("parse", "marker file: missing header row");
  }
  auto const header = split_fields(line);
  if (header.empty() || header[0] != "time_s" || (header.size() - 1) % 3 != 0)
  {
    throw Error("parse", "marker file: header must be time_s followed by x,y,z triples");
  }
  // columns may come in any marker order; each triple must be <label>_x,_y,_z
  std::vector<Marker> columns;
  for (std::size_t c = 1; c < header.size(); c += 3)
  {
    auto const base = header[c].substr(0, header[c].size() - 2);
    if (header[c] != std::string(base) + "_x" || header[c + 1] != std::string(base) + "_y" ||
        header[c + 2] != std::string(base) + "_z")
    {
      throw Error("parse", "marker file: malformed column triple at '" + std::string(header[c]) + "'");
    }
    columns.push_back(parse_marker(base));
  }

  std::vector<MarkerFrame> frames;
  std::size_t              row = 1;
  while (read_line(in, line))
  {
    ++row;
    if (line.empty())
    {
      continue;
    }
    auto const fields = split_fields(line);
    if (fields.size() != header.size())
    {
      throw Error("parse", "marker file row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    MarkerFrame frame;
    frame.time = parse_double(fields[0], "marker file time_s");
    for (std::size_t m = 0; m < columns.size(); ++m)
    {
      auto const x = fields[1 + 3 * m], y = fields[2 + 3 * m], z = fields[3 + 3 * m];
      if (x.empty() && y.empty() && z.empty())
      {
        continue;
      }
      std::string const what = "marker file row " + std::to_string(row) + " " + label(columns[m]);
      frame.set(columns[m], {parse_double(x, what), parse_double(y, what), parse_double(z, what)});
    }
    frames.push_back(frame);
  }
  return frames;
}

void write_configuration_csv(std::ostream &out, std::vector<double> const &times,
                             std::vector<Configuration> const &configs)
{
  if (times.size() != configs.size())
  {
    throw Error("shape", "configuration stream: time and configuration counts differ");
  }
  out << "time_s";
  for (auto const &n : kJointNames)
  {
    out << ',' << n;
  }
  out << '\n';
  for (std::size_t i = 0; i < configs.size(); ++i)
  {
    out << format_double(times[i]);
    for (double a : configs[i])
    {
      out << ',' << format_double(a);
    }
    out << '\n';
  }
}

}  // namespace finemotion::kin

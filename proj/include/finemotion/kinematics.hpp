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

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace finemotion::kin {

using Vec3 = std::array<double, 3>;

/// Norms and triangle areas below this (millimetres) count as degenerate.
inline constexpr double kDegenerate = 1e-9;

Vec3   vector_between(Vec3 const &a, Vec3 const &b);
double dot(Vec3 const &a, Vec3 const &b);
Vec3   cross(Vec3 const &a, Vec3 const &b);
double norm(Vec3 const &a);
Vec3   normalized(Vec3 const &a);

/// atan2(|u x v|, u . v), in [0, pi]. `what` names the vectors in the error
/// raised for a degenerate input.
double angle_between(Vec3 const &u, Vec3 const &v, std::string_view what = "u, v");

/// Unit normal of the palm plane, oriented as (f41 - f11) x (t4 - f11).
Vec3 palm_normal(Vec3 const &f11, Vec3 const &f41, Vec3 const &t4);

// Marker schema. Finger rays 1..4 are the index..little fingers; marker
// f<ray><j> sits on the MP (j=1), PIP (2), DIP (3) joint or the fingertip (4).
enum class Marker : std::size_t
{
  f11, f12, f13, f14,
  f21, f22, f23, f24,
  f31, f32, f33, f34,
  f41, f42, f43, f44,
  t3, t4, t5, t6, t7,
  e1, e2
};
inline constexpr std::size_t kMarkerCount = 23;

std::string_view marker_label(Marker m);
Marker           parse_marker(std::string_view label);
/// Marker j (1..4) of finger ray `ray` (1..4).
Marker finger_marker(std::size_t ray, std::size_t j);

struct MarkerFrame
{
  double                          time = 0.0;  // seconds
  std::array<Vec3, kMarkerCount>  positions{};
  std::array<bool, kMarkerCount>  present{};

  void set(Marker m, Vec3 const &p)
  {
    positions[static_cast<std::size_t>(m)] = p;
    present[static_cast<std::size_t>(m)]   = true;
  }
  /// Throws when the marker is missing from this frame.
  Vec3 const &at(Marker m) const;
};

// Configuration layout: thumb (2), fingers 2..5 (3 each), wrist roll,
// pitch, yaw.
inline constexpr std::size_t kJointCount = 17;
using Configuration                      = std::array<double, kJointCount>;

inline constexpr std::size_t kThumbMp    = 0;
inline constexpr std::size_t kThumbIp    = 1;
inline constexpr std::size_t kWristRoll  = 14;
inline constexpr std::size_t kWristPitch = 15;
inline constexpr std::size_t kWristYaw   = 16;
/// Index of joint m (1..3) of finger ray `ray` (1..4, i.e. fingers 2..5).
constexpr std::size_t finger_joint(std::size_t ray, std::size_t m)
{
  return 2 + 3 * (ray - 1) + (m - 1);
}

std::string_view joint_name(std::size_t index);

/// Anchor marker used by each finger ray's MP angle.
using AnchorTable = std::array<Marker, 4>;
inline constexpr AnchorTable kDefaultAnchors{Marker::t5, Marker::t5, Marker::t5, Marker::t5};

Configuration extract_configuration(MarkerFrame const &frame, AnchorTable const &anchors = kDefaultAnchors);

/// Angles / pi, and back. Angles outside [0, pi] are rejected.
std::array<double, kJointCount> normalize_configuration(Configuration const &x);
Configuration                   denormalize_configuration(std::array<double, kJointCount> const &values);

/// Rotation (row-major 3x3) followed by translation.
struct RigidTransform
{
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3                  translation{};

  Vec3 apply(Vec3 const &p) const;
};

/// Rotation from a (not necessarily unit) quaternion w, x, y, z.
RigidTransform rigid_from_quaternion(double w, double x, double y, double z, Vec3 const &translation);
MarkerFrame    transformed(MarkerFrame const &frame, RigidTransform const &transform);

// Marker stream text format: header "time_s,<label>_x,<label>_y,<label>_z,..."
// in schema order, one row per timestamp, millimetres. A missing marker is
// written as three empty fields.
void                     write_marker_csv(std::ostream &out, std::vector<MarkerFrame> const &frames);
std::vector<MarkerFrame> read_marker_csv(std::istream &in);

// Configuration stream: "time_s,<joint names>" then one row per frame.
void write_configuration_csv(std::ostream &out, std::vector<double> const &times,
                             std::vector<Configuration> const &configs);

}  // namespace finemotion::kin

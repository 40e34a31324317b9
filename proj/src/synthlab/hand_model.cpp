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

#include "finemotion/error.hpp"
#include "finemotion/synthlab.hpp"

#include <cmath>
#include <numbers>

namespace finemotion::synth {
namespace {

using kin::Marker;
using kin::Vec3;

Vec3 add(Vec3 const &a, Vec3 const &b, double scale = 1.0)
{
  return {a[0] + scale * b[0], a[1] + scale * b[1], a[2] + scale * b[2]};
}

Vec3 mix(double a, Vec3 const &u, double b, Vec3 const &v)
{
  return {a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]};
}

void check(HandGeometry const &g)
{
  for (double l : g.finger_segments)
  {
    if (!(l > 0.0))
    {
      throw Error("geometry", "finger segment lengths must be positive");
    }
  }
  for (double l : g.thumb_segments)
  {
    if (!(l > 0.0))
    {
      throw Error("geometry", "thumb segment lengths must be positive");
    }
  }
  if (!(g.ray_spacing > 0.0 && g.forearm_marker > 0.0 && g.elbow_distance > 0.0 && g.elbow_span > 0.0))
  {
    throw Error("geometry", "ray spacing and forearm distances must be positive");
  }
  // the palm normal must be +z: t4 on the -y side of the MP row, in the plane
  if (g.anchor[2] != 0.0 || g.wrist[2] != 0.0 || !(g.wrist[1] < 0.0))
  {
    throw Error("geometry", "anchor and wrist markers must lie in the palm plane behind the MP row");
  }
  // the anchor may not sit on any finger ray's line, or MP angles are undefined
  for (std::size_t ray = 1; ray <= 4; ++ray)
  {
    Vec3 const mp{-g.ray_spacing * static_cast<double>(ray - 1), 0.0, 0.0};
    if (kin::norm(kin::vector_between(g.anchor, mp)) <= 1e-6 || !(g.anchor[1] < 0.0))
    {
      throw Error("geometry", "palm anchor must lie behind the MP row, off every MP marker");
    }
  }
}

}  // namespace

HandGeometry random_geometry(std::uint64_t seed)
{
  Rng          rng(seed);
  HandGeometry g;
  for (auto &l : g.finger_segments)
  {
    l *= uniform(rng, 0.9, 1.1);
  }
  for (auto &l : g.thumb_segments)
  {
    l *= uniform(rng, 0.9, 1.1);
  }
  g.ray_spacing *= uniform(rng, 0.9, 1.1);
  g.placement = kin::rigid_from_quaternion(standard_normal(rng), standard_normal(rng), standard_normal(rng),
                                           standard_normal(rng),
                                           {uniform(rng, -300, 300), uniform(rng, -300, 300), uniform(rng, 500, 900)});
  return g;
}

kin::MarkerFrame markers_from_config(kin::Configuration const &x, HandGeometry const &g, double time)
{
  check(g);
  for (std::size_t i = 0; i < kin::kJointCount; ++i)
  {
    if (!(x[i] >= 0.0 && x[i] <= std::numbers::pi))
    {
      throw Error("range", "joint " + std::string(kin::joint_name(i)) + " outside [0, pi]");
    }
  }
  double const cp = std::cos(x[kin::kWristPitch]);
  double const cy = std::cos(x[kin::kWristYaw]);
  double const lateral = 1.0 - cp * cp - cy * cy;
  if (lateral < 0.0)
  {
    throw Error("range", "wrist pitch and yaw unreachable: cos^2(pitch) + cos^2(yaw) > 1");
  }

  // hand frame: palm in z = 0 with normal +z, MP row along -x, wrist toward -y
  Vec3 const       n{0.0, 0.0, 1.0};
  kin::MarkerFrame f;
  f.time = time;
  f.set(Marker::t5, g.anchor);
  f.set(Marker::t4, g.wrist);

  for (std::size_t ray = 1; ray <= 4; ++ray)
  {
    Vec3 const mp{-g.ray_spacing * static_cast<double>(ray - 1), 0.0, 0.0};
    Vec3 const u = kin::normalized(kin::vector_between(g.anchor, mp));
    // each joint angle J bends the next segment by pi - J out of the palm plane
    double phi = 0.0;
    Vec3   p   = mp;
    f.set(kin::finger_marker(ray, 1), p);
    for (std::size_t m = 1; m <= 3; ++m)
    {
      phi += std::numbers::pi - x[kin::finger_joint(ray, m)];
      p = add(p, mix(std::cos(phi), u, std::sin(phi), n), g.finger_segments[m - 1]);
      f.set(kin::finger_marker(ray, m + 1), p);
    }
  }

  // thumb: t5 -> t6 makes angle J1_1 with the normal; the IP angle at t6
  Vec3 const   w{1.0, 0.0, 0.0};
  double const a   = x[kin::kThumbMp];
  Vec3 const   dir = mix(std::cos(a), n, std::sin(a), w);
  Vec3 const   perp = mix(-std::sin(a), n, std::cos(a), w);
  double const psi  = std::numbers::pi - x[kin::kThumbIp];
  Vec3 const   t6   = add(g.anchor, dir, g.thumb_segments[0]);
  f.set(Marker::t6, t6);
  f.set(Marker::t7, add(t6, mix(std::cos(psi), dir, std::sin(psi), perp), g.thumb_segments[1]));

  // forearm direction: cos(pitch) along the normal, cos(yaw) along f41->f11
  Vec3 const fore{cy, -std::sqrt(lateral), cp};
  Vec3 const t3 = add(g.wrist, fore, g.forearm_marker);
  f.set(Marker::t3, t3);
  Vec3 const   e1 = add(t3, fore, g.elbow_distance);
  double const r  = x[kin::kWristRoll];
  f.set(Marker::e1, e1);
  f.set(Marker::e2, add(e1, mix(std::cos(r), n, std::sin(r), w), g.elbow_span));
  return kin::transformed(f, g.placement);
}

kin::Configuration random_configuration(Rng &rng)
{
  kin::Configuration x{};
  for (auto &v : x)
  {
    v = uniform(rng, 0.0, std::numbers::pi);
  }
  x[kin::kWristPitch] = uniform(rng, std::numbers::pi / 4, 3 * std::numbers::pi / 4);
  x[kin::kWristYaw]   = uniform(rng, std::numbers::pi / 4, 3 * std::numbers::pi / 4);
  return x;
}

}  // namespace finemotion::synth

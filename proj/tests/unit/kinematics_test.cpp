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
#include "finemotion/kinematics.hpp"
#include "finemotion/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace finemotion;
using namespace finemotion::kin;

namespace {

constexpr double kPi = std::numbers::pi;

MarkerFrame random_frame(Rng &rng)
{
  MarkerFrame f;
  f.time = 0.25;
  for (std::size_t i = 0; i < kMarkerCount; ++i)
  {
    f.set(static_cast<Marker>(i), {uniform(rng, -100, 100), uniform(rng, -100, 100), uniform(rng, -100, 100)});
  }
  return f;
}

RigidTransform random_transform(Rng &rng)
{
  return rigid_from_quaternion(standard_normal(rng), standard_normal(rng), standard_normal(rng),
                               standard_normal(rng),
                               {uniform(rng, -500, 500), uniform(rng, -500, 500), uniform(rng, -500, 500)});
}

}  // namespace

TEST(Kinematics, VectorBetween)
{
  EXPECT_EQ(vector_between({0, 0, 0}, {1, 2, 3}), (Vec3{1, 2, 3}));
  EXPECT_EQ(vector_between({4, 5, 6}, {4, 5, 6}), (Vec3{0, 0, 0}));
  EXPECT_EQ(vector_between({1, 0, 0}, {1, 1, 0}), (Vec3{0, 1, 0}));
}

TEST(Kinematics, AnalyticAngles)
{
  EXPECT_NEAR(angle_between({1, 0, 0}, {0, 1, 0}), kPi / 2, 1e-12);
  EXPECT_NEAR(angle_between({1, 0, 0}, {1, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(angle_between({1, 0, 0}, {-1, 0, 0}), kPi, 1e-12);
  EXPECT_NEAR(angle_between({1, 0, 0}, {1, 1, 0}), kPi / 4, 1e-12);
  EXPECT_NEAR(angle_between({1, 0, 0}, {1, 1, 0}), std::acos(1.0 / std::sqrt(2.0)), 1e-12);
}

TEST(Kinematics, AngleRejectsDegenerateVectorWithLabels)
{
  try
  {
    angle_between({0, 0, 0}, {1, 0, 0}, "f42->f43, f42->f41");
    FAIL();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.code(), "degenerate");
    EXPECT_NE(std::string(e.what()).find("f42->f43"), std::string::npos);
  }
}

TEST(Kinematics, AngleSymmetricScaleInvariantInRange)
{
  Rng rng(7);
  for (int i = 0; i < 1000; ++i)
  {
    Vec3 const   u{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    Vec3 const   v{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    double const c = uniform(rng, 0.01, 100), d = uniform(rng, 0.01, 100);
    double const a = angle_between(u, v);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, kPi);
    EXPECT_NEAR(angle_between(v, u), a, 1e-12);
    EXPECT_NEAR(angle_between({c * u[0], c * u[1], c * u[2]}, {d * v[0], d * v[1], d * v[2]}), a, 1e-12);
  }
}

TEST(Kinematics, PalmNormal)
{
  Vec3 const n = palm_normal({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  EXPECT_NEAR(n[0], 0.0, 1e-15);
  EXPECT_NEAR(n[2], 1.0, 1e-15);
  Rng rng(3);
  for (int i = 0; i < 100; ++i)
  {
    Vec3 const a{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    Vec3 const b{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    Vec3 const c{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    Vec3 const p = palm_normal(a, b, c);
    Vec3 const q = palm_normal(a, c, b);
    EXPECT_NEAR(norm(p), 1.0, 1e-12);
    for (int k = 0; k < 3; ++k)
    {
      EXPECT_NEAR(p[k], -q[k], 1e-12);
    }
  }
  EXPECT_THROW(palm_normal({0, 0, 0}, {1, 1, 1}, {2, 2, 2}), Error);
}

TEST(Kinematics, StraightFingerReadsPi)
{
  Rng         rng(11);
  MarkerFrame f = random_frame(rng);
  // ray 2 along +x with the anchor behind the MP marker
  f.set(Marker::t5, {-30, 0, 0});
  for (std::size_t j = 1; j <= 4; ++j)
  {
    f.set(finger_marker(2, j), {10.0 * static_cast<double>(j), 0, 0});
  }
  auto const x = extract_configuration(f);
  for (std::size_t m = 1; m <= 3; ++m)
  {
    EXPECT_NEAR(x[finger_joint(2, m)], kPi, 1e-12);
  }
}

TEST(Kinematics, BentPipReadsHalfPi)
{
  Rng         rng(12);
  MarkerFrame f = random_frame(rng);
  f.set(Marker::f21, {0, 0, 0});
  f.set(Marker::f22, {1, 0, 0});
  f.set(Marker::f23, {1, -1, 0});
  EXPECT_NEAR(extract_configuration(f)[finger_joint(2, 2)], kPi / 2, 1e-12);
}

TEST(Kinematics, MissingMarkerNamed)
{
  Rng         rng(5);
  MarkerFrame f = random_frame(rng);
  f.present[static_cast<std::size_t>(Marker::t6)] = false;
  try
  {
    extract_configuration(f);
    FAIL();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.code(), "missing");
    EXPECT_NE(std::string(e.what()).find("'t6'"), std::string::npos);
  }
}

TEST(Kinematics, RigidTransformInvariance)
{
  Rng rng(21);
  for (int i = 0; i < 100; ++i)
  {
    MarkerFrame const f = random_frame(rng);
    auto const        x = extract_configuration(f);
    auto const        y = extract_configuration(transformed(f, random_transform(rng)));
    for (std::size_t j = 0; j < kJointCount; ++j)
    {
      EXPECT_NEAR(x[j], y[j], 1e-9) << joint_name(j);
    }
  }
}

TEST(Kinematics, AnchorTableIsUsed)
{
  Rng               rng(8);
  MarkerFrame const f       = random_frame(rng);
  AnchorTable       anchors = kDefaultAnchors;
  anchors[0]                = Marker::t4;
  auto const a = extract_configuration(f);
  auto const b = extract_configuration(f, anchors);
  EXPECT_NE(a[finger_joint(1, 1)], b[finger_joint(1, 1)]);
  EXPECT_EQ(a[finger_joint(2, 1)], b[finger_joint(2, 1)]);
}

TEST(Kinematics, NormalizeRoundTrip)
{
  Configuration zeros{}, pis{}, half{};
  zeros.fill(0.0);
  pis.fill(kPi);
  half.fill(kPi / 2);
  for (double v : normalize_configuration(zeros))
  {
    EXPECT_EQ(v, 0.0);
  }
  for (double v : normalize_configuration(pis))
  {
    EXPECT_EQ(v, 1.0);
  }
  for (double v : normalize_configuration(half))
  {
    EXPECT_EQ(v, 0.5);
  }
  Rng           rng(2);
  Configuration x{};
  for (auto &v : x)
  {
    v = uniform(rng, 0, kPi);
  }
  auto const back = denormalize_configuration(normalize_configuration(x));
  for (std::size_t i = 0; i < kJointCount; ++i)
  {
    EXPECT_NEAR(back[i], x[i], 1e-15);
  }
  x[3] = kPi + 1e-6;
  EXPECT_THROW(normalize_configuration(x), Error);
  x[3] = -1e-6;
  EXPECT_THROW(normalize_configuration(x), Error);
}

TEST(Kinematics, JointAndMarkerNames)
{
  EXPECT_EQ(joint_name(0), "J1_1");
  EXPECT_EQ(joint_name(finger_joint(4, 3)), "J5_3");
  EXPECT_EQ(joint_name(kWristYaw), "Jw_y");
  EXPECT_THROW(joint_name(kJointCount), Error);
  for (std::size_t i = 0; i < kMarkerCount; ++i)
  {
    EXPECT_EQ(static_cast<std::size_t>(parse_marker(marker_label(static_cast<Marker>(i)))), i);
  }
  EXPECT_EQ(finger_marker(4, 4), Marker::f44);
  EXPECT_THROW(finger_marker(5, 1), Error);
  EXPECT_THROW(parse_marker("f55"), Error);
}

TEST(Kinematics, MarkerCsvRoundTrip)
{
  Rng                      rng(9);
  std::vector<MarkerFrame> frames;
  for (int i = 0; i < 5; ++i)
  {
    frames.push_back(random_frame(rng));
    frames.back().time = 0.05 * i;
  }
  frames[2].present[static_cast<std::size_t>(Marker::e2)] = false;
  std::stringstream buf;
  write_marker_csv(buf, frames);
  auto const back = read_marker_csv(buf);
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
  {
    EXPECT_EQ(back[i].time, frames[i].time);
    EXPECT_EQ(back[i].present, frames[i].present);
    for (std::size_t m = 0; m < kMarkerCount; ++m)
    {
      if (frames[i].present[m])
      {
        EXPECT_EQ(back[i].positions[m], frames[i].positions[m]);
      }
    }
  }
}

TEST(Kinematics, MarkerCsvRejectsBadInput)
{
  std::stringstream bad_header("time,f11_x,f11_y,f11_z\n");
  EXPECT_THROW(read_marker_csv(bad_header), Error);
  std::stringstream short_row("time_s,f11_x,f11_y,f11_z\n0.1,1,2\n");
  EXPECT_THROW(read_marker_csv(short_row), Error);
  std::stringstream bad_number("time_s,f11_x,f11_y,f11_z\n0.1,1,x,3\n");
  EXPECT_THROW(read_marker_csv(bad_number), Error);
}

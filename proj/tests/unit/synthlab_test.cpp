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

#include "finemotion/datapipe.hpp"
#include "finemotion/error.hpp"
#include "finemotion/synthlab.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace finemotion;
using namespace finemotion::synth;

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t max_concurrency(std::vector<data::PressEvent> const &events)
{
  std::size_t best = 0;
  for (auto const &e : events)
  {
    std::size_t n = 0;
    for (auto const &o : events)
    {
      n += (o.onset <= e.onset && e.onset < o.release) ? 1 : 0;
    }
    best = std::max(best, n);
  }
  return best;
}

}  // namespace

TEST(MotionScript, TypingInvariants)
{
  LabConstants const lab;
  auto const         s = gen_motion_script(data::Task::kTyping, 90, 1);
  EXPECT_EQ(max_concurrency(s.intents), 1u);
  for (std::size_t i = 0; i < s.intents.size(); ++i)
  {
    auto const &e = s.intents[i];
    EXPECT_GE(e.release - e.onset, lab.typing_min_duration);
    EXPECT_LE(e.release - e.onset, lab.typing_max_duration);
    EXPECT_LE(e.release, 90.0);
    for (std::size_t j = i + 1; j < s.intents.size(); ++j)
    {
      auto const &o = s.intents[j];
      EXPECT_TRUE(e.release <= o.onset || o.release <= e.onset);
    }
  }
  double const rate = static_cast<double>(s.intents.size()) / 90.0;
  EXPECT_NEAR(rate, 1.5, 0.3);
}

TEST(MotionScript, PianoInvariants)
{
  LabConstants const lab;
  for (std::uint64_t seed = 0; seed < 5; ++seed)
  {
    auto const s = gen_motion_script(data::Task::kPiano, 90, seed);
    EXPECT_LE(max_concurrency(s.intents), 2u);
    for (std::size_t i = 0; i < s.intents.size(); ++i)
    {
      auto const &e = s.intents[i];
      EXPECT_GE(e.release - e.onset, lab.piano_min_duration);
      EXPECT_LE(e.release - e.onset, lab.piano_max_duration);
      for (std::size_t j = i + 1; j < s.intents.size(); ++j)
      {
        auto const &o = s.intents[j];
        if (o.finger == e.finger)
        {
          EXPECT_TRUE(e.release <= o.onset || o.release <= e.onset);
        }
      }
    }
    EXPECT_NEAR(static_cast<double>(s.intents.size()) / 90.0, 1.5, 0.4);
  }
}

TEST(MotionScript, Deterministic)
{
  auto const a = gen_motion_script(data::Task::kPiano, 30, 9);
  auto const b = gen_motion_script(data::Task::kPiano, 30, 9);
  EXPECT_EQ(a.intents, b.intents);
  EXPECT_NE(a.intents, gen_motion_script(data::Task::kPiano, 30, 10).intents);
  EXPECT_THROW(gen_motion_script(data::Task::kPiano, 0, 1), Error);
}

TEST(Joints, EmptyScriptRestsAtRest)
{
  LabConstants const lab;
  MotionScript       s{data::Task::kPiano, 5.0, {}};
  auto const         traj = joints_from_script(s, 20, 3);
  ASSERT_EQ(traj.configs.size(), 100u);
  auto const rest = rest_configuration(lab);
  for (std::size_t i = 0; i < traj.configs.size(); ++i)
  {
    for (std::size_t j = 0; j < kin::kWristRoll; ++j)
    {
      EXPECT_EQ(traj.configs[i][j], rest[j]);
    }
    EXPECT_EQ(traj.presses[i], (data::PressVector{}));
  }
  EXPECT_TRUE(traj.events.empty());
}

TEST(Joints, SinglePressIsOneContiguousRun)
{
  MotionScript s{data::Task::kPiano, 3.0, {{3, 1.0, 1.4}}};
  auto const   traj = joints_from_script(s, 20, 4);
  std::size_t  runs = 0, ones = 0;
  for (std::size_t i = 0; i < traj.presses.size(); ++i)
  {
    for (std::size_t f = 0; f < 5; ++f)
    {
      if (f != 2)
      {
        EXPECT_EQ(traj.presses[i][f], 0);
      }
    }
    ones += traj.presses[i][2];
    if (traj.presses[i][2] && (i == 0 || !traj.presses[i - 1][2]))
    {
      ++runs;
    }
  }
  EXPECT_EQ(runs, 1u);
  EXPECT_GE(ones, 6u);
  ASSERT_EQ(traj.events.size(), 1u);
  // the response lags the intent
  EXPECT_GT(traj.events[0].onset, 1.0);
  EXPECT_GT(traj.events[0].release, 1.4);
}

TEST(Joints, LabelsMatchEmittedEvents)
{
  for (auto task : {data::Task::kPiano, data::Task::kTyping})
  {
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
      auto const script = gen_motion_script(task, 90, seed);
      auto const traj   = joints_from_script(script, 20, seed);
      for (std::size_t i = 0; i < traj.times.size(); ++i)
      {
        ASSERT_EQ(traj.presses[i], data::press_vector_at(traj.times[i], traj.events)) << "frame " << i;
      }
      EXPECT_NO_THROW(data::validate(data::PressEventStream{task, traj.events}));
    }
  }
}

TEST(Joints, TypingIsShallowerAndWristCalmer)
{
  MotionScript piano{data::Task::kPiano, 3.0, {{2, 1.0, 1.5}}};
  MotionScript typing{data::Task::kTyping, 3.0, {{2, 1.0, 1.5}}};
  auto const   p = joints_from_script(piano, 20, 1);
  auto const   t = joints_from_script(typing, 20, 1);
  double       min_p = kPi, min_t = kPi, spread_p = 0, spread_t = 0;
  for (std::size_t i = 0; i < p.configs.size(); ++i)
  {
    min_p    = std::min(min_p, p.configs[i][kin::finger_joint(1, 1)]);
    min_t    = std::min(min_t, t.configs[i][kin::finger_joint(1, 1)]);
    spread_p = std::max(spread_p, std::abs(p.configs[i][kin::kWristPitch] - kPi / 2));
    spread_t = std::max(spread_t, std::abs(t.configs[i][kin::kWristPitch] - kPi / 2));
  }
  EXPECT_NEAR((kPi - min_t) / (kPi - min_p), 0.7, 1e-9);
  EXPECT_NEAR(spread_p / spread_t, 3.0, 1e-9);
}

TEST(HandModel, RoundTripOnRandomConfigurations)
{
  Rng rng(17);
  for (int i = 0; i < 1000; ++i)
  {
    HandGeometry const       g = random_geometry(static_cast<std::uint64_t>(i % 10));
    kin::Configuration const x = random_configuration(rng);
    auto const               y = kin::extract_configuration(markers_from_config(x, g));
    for (std::size_t j = 0; j < kin::kJointCount; ++j)
    {
      ASSERT_NEAR(y[j], x[j], 1e-9) << kin::joint_name(j);
    }
  }
}

TEST(HandModel, RigidInvarianceOfEmittedFrames)
{
  Rng rng(5);
  for (int i = 0; i < 100; ++i)
  {
    kin::Configuration const x     = random_configuration(rng);
    auto const               frame = markers_from_config(x);
    auto const               moved = kin::transformed(
        frame, kin::rigid_from_quaternion(standard_normal(rng), standard_normal(rng), standard_normal(rng),
                                          standard_normal(rng), {uniform(rng, -1e3, 1e3), 0, 5}));
    auto const a = kin::extract_configuration(frame);
    auto const b = kin::extract_configuration(moved);
    for (std::size_t j = 0; j < kin::kJointCount; ++j)
    {
      EXPECT_NEAR(a[j], b[j], 1e-9);
    }
  }
}

TEST(HandModel, StraightFingersAreCollinear)
{
  kin::Configuration x = rest_configuration();
  for (std::size_t ray = 1; ray <= 4; ++ray)
  {
    x[kin::finger_joint(ray, 3)] = kPi;
  }
  auto const f = markers_from_config(x);
  for (std::size_t ray = 1; ray <= 4; ++ray)
  {
    auto const a = f.at(kin::Marker::t5);
    auto const d = kin::vector_between(a, f.at(kin::finger_marker(ray, 1)));
    for (std::size_t j = 2; j <= 4; ++j)
    {
      auto const e = kin::vector_between(a, f.at(kin::finger_marker(ray, j)));
      EXPECT_LT(kin::norm(kin::cross(d, e)) / (kin::norm(d) * kin::norm(e)), 1e-12);
    }
  }
}

TEST(HandModel, RejectsBadGeometryAndUnreachableWrist)
{
  HandGeometry g;
  g.finger_segments[1] = 0.0;
  EXPECT_THROW(markers_from_config(rest_configuration(), g), Error);
  HandGeometry h;
  h.anchor = {0.0, 0.0, 0.0};
  EXPECT_THROW(markers_from_config(rest_configuration(), h), Error);
  kin::Configuration x = rest_configuration();
  x[kin::kWristPitch]  = 0.1;
  x[kin::kWristYaw]    = 0.1;
  EXPECT_THROW(markers_from_config(x), Error);
}

TEST(Render, NoiseFreeImagesAreInjectiveAndRngFree)
{
  Phenotype const ph = make_phenotype(3, 0.0);
  Rng             rng(1), other(2);
  auto const      rest = rest_configuration();
  auto const      base = render_frame(rest, ph, 64, rng);
  EXPECT_EQ(base, render_frame(rest, ph, 64, other));
  Rng draw(8);
  for (int i = 0; i < 200; ++i)
  {
    kin::Configuration x = rest;
    std::size_t const  j = uniform_index(draw, kin::kJointCount);
    x[j] -= uniform(draw, 0.001, 0.3);
    EXPECT_NE(render_frame(x, ph, 64, rng), base) << kin::joint_name(j);
    kin::Configuration y = x;
    EXPECT_EQ(render_frame(y, ph, 64, other), render_frame(x, ph, 64, rng));
  }
}

TEST(Render, DefaultNoiseStaysInUnitRange)
{
  Phenotype const ph = make_phenotype(4, 0.2);
  Rng             rng(3), draw(4);
  for (int i = 0; i < 10000; ++i)
  {
    kin::Configuration x = rest_configuration();
    for (std::size_t j = 0; j < kin::kWristRoll; ++j)
    {
      x[j] -= uniform(draw, 0.0, 1.0);
    }
    auto const img = render_frame(x, ph, 32, rng);
    ASSERT_TRUE(std::all_of(img.begin(), img.end(), [](double v) { return v >= 0.0 && v <= 1.0; }));
  }
  EXPECT_THROW(render_frame(rest_configuration(), ph, 16, rng), Error);
}

TEST(Render, BandsAreOrderedAndGainsPositive)
{
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    Phenotype const ph = make_phenotype(seed, 0.2);
    for (std::size_t b = 0; b < kBands; ++b)
    {
      if (b > 0)
      {
        EXPECT_GT(ph.bands[b].centre - ph.bands[b].half, ph.bands[b - 1].centre + ph.bands[b - 1].half);
      }
      for (auto const &g : ph.bands[b].gain)
      {
        for (double v : g)
        {
          EXPECT_GT(v, 0.0);
        }
      }
    }
  }
}

TEST(Session, FrameCountAndDeterminism)
{
  SessionRequest r;
  r.duration = 90;
  r.side     = 32;
  auto const a = gen_session(r);
  EXPECT_EQ(a.frames.size(), 1800u);
  EXPECT_EQ(a.markers.size(), 1800u);
  auto const b = gen_session(r);
  EXPECT_EQ(a.frame_times, b.frame_times);
  EXPECT_EQ(a.events.events, b.events.events);
  for (std::size_t i = 0; i < a.frames.size(); i += 97)
  {
    EXPECT_EQ(a.frames[i].pixels, b.frames[i].pixels);
    EXPECT_EQ(a.markers[i].positions, b.markers[i].positions);
  }
  r.index = 1;
  EXPECT_NE(gen_session(r).events.events, a.events.events);
  EXPECT_EQ(session_name(r), "subj0-piano-1");
}

TEST(Session, AlignsLosslesslyToItsOwnTrajectory)
{
  SessionRequest r;
  r.task     = data::Task::kTyping;
  r.duration = 20;
  r.side     = 32;
  auto const s   = gen_session(r);
  auto const seq = data::align(s, 32);
  EXPECT_EQ(seq.dropped, 0u);
  ASSERT_EQ(seq.size(), s.frames.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
  {
    EXPECT_EQ(seq.presses[i], data::press_vector_at(seq.times[i], s.events.events));
  }
}

// A linear probe from pixels to normalized angles must recover the hand
// configuration well, so that the synthetic task is learnable.
TEST(Session, LinearProbeRecoversConfigurations)
{
  std::vector<std::vector<double>>                     images;
  std::vector<std::array<double, kin::kJointCount>>    configs;
  for (auto task : {data::Task::kPiano, data::Task::kTyping})
  {
    SessionRequest r;
    r.task     = task;
    r.duration = 75;
    r.side     = 64;
    auto seq   = data::align(gen_session(r), 64);
    images.insert(images.end(), seq.images.begin(), seq.images.end());
    configs.insert(configs.end(), seq.configs.begin(), seq.configs.end());
  }
  // interleave so both tasks appear in the fit and the held-out set
  std::size_t const n_fit = 2000, n = images.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    order[i] = i;
  }
  Rng rng(1);
  shuffle(order, rng);

  std::size_t const d = images[0].size() + 1;
  Eigen::MatrixXd   x(n, d);
  Eigen::MatrixXd   y(n, kin::kJointCount);
  for (std::size_t r = 0; r < n; ++r)
  {
    auto const i = order[r];
    for (std::size_t c = 0; c + 1 < d; ++c)
    {
      x(r, c) = images[i][c];
    }
    x(r, d - 1) = 1.0;
    for (std::size_t j = 0; j < kin::kJointCount; ++j)
    {
      y(r, j) = configs[i][j];
    }
  }
  Eigen::MatrixXd const xf = x.topRows(n_fit);
  // ridge in dual form: w = X^T (X X^T + a I)^-1 Y
  Eigen::MatrixXd gram = xf * xf.transpose();
  gram.diagonal().array() += 1.0;
  Eigen::MatrixXd const w    = xf.transpose() * gram.ldlt().solve(y.topRows(n_fit));
  Eigen::MatrixXd const test = x.bottomRows(n - n_fit);
  Eigen::MatrixXd const yt   = y.bottomRows(n - n_fit);
  double const          mae  = (test * w - yt).cwiseAbs().mean();
  Eigen::RowVectorXd const mean = y.topRows(n_fit).colwise().mean();
  double const baseline = (yt.rowwise() - mean).cwiseAbs().mean();
  EXPECT_LT(mae, 0.1);
  EXPECT_LT(mae, 0.5 * baseline);
}

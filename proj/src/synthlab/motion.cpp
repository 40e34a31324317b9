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

#include <algorithm>
#include <cmath>
#include <numbers>

namespace finemotion::synth {
namespace {

constexpr double kScanStep = 0.002;  // seconds; far below the response time

double exponential(Rng &rng, double mean)
{
  return -mean * std::log1p(-uniform01(rng));
}

/// Flexion fraction of one finger: a critically damped response to a
/// target that is 1 while an intent is active and 0 otherwise.
class FingerResponse
{
public:
  FingerResponse(std::vector<data::PressEvent> const &intents, std::size_t finger, double time_constant)
    : omega_(1.0 / time_constant)
  {
    segments_.push_back({0.0, 0.0, 0.0, 0.0});
    for (auto const &e : intents)
    {
      if (e.finger == finger)
      {
        switch_to(e.onset, 1.0);
        switch_to(e.release, 0.0);
      }
    }
  }

  double at(double t) const
  {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, Segment const &s) { return v < s.start; });
    Segment const &s = *std::prev(it);
    return s.target + error(s, t - s.start);
  }

private:
  struct Segment
  {
    double start, target, e0, v0;
  };

  double error(Segment const &s, double dt) const
  {
    return (s.e0 + (s.v0 + omega_ * s.e0) * dt) * std::exp(-omega_ * dt);
  }
  double velocity(Segment const &s, double dt) const
  {
    return (s.v0 - omega_ * (s.v0 + omega_ * s.e0) * dt) * std::exp(-omega_ * dt);
  }

  void switch_to(double t, double target)
  {
    Segment const &s  = segments_.back();
    double const   dt = t - s.start;
    double const   x  = s.target + error(s, dt);
    segments_.push_back({t, target, x - target, velocity(s, dt)});
  }

  double               omega_;
  std::vector<Segment> segments_;
};

struct Drift
{
  std::array<double, 3> weight, frequency, phase;
  double                offset = 0.0;

  double at(double t, double amplitude) const
  {
    double v = offset;
    for (std::size_t j = 0; j < 3; ++j)
    {
      v += weight[j] * std::sin(2.0 * std::numbers::pi * frequency[j] * t + phase[j]);
    }
    return std::numbers::pi / 2 + amplitude * v;
  }
};

}  // namespace

MotionScript gen_motion_script(data::Task task, double duration, std::uint64_t seed, LabConstants const &lab)
{
  if (!(duration > 0.0))
  {
    throw Error("range", "script duration must be positive");
  }
  MotionScript script;
  script.task     = task;
  script.duration = duration;
  Rng          rng(seed);
  double const tail = 0.5;  // leave time for the last release to settle

  if (task == data::Task::kTyping)
  {
    double const mean_duration = 0.5 * (lab.typing_min_duration + lab.typing_max_duration);
    double const mean_gap      = std::max(0.0, 1.0 / lab.press_rate - mean_duration - lab.typing_min_gap);
    double       t             = uniform(rng, 0.3, 0.8);
    while (true)
    {
      double const d = uniform(rng, lab.typing_min_duration, lab.typing_max_duration);
      if (t + d > duration - tail)
      {
        break;
      }
      std::size_t const finger = 1 + uniform_index(rng, data::kFingers);
      script.intents.push_back({finger, t, t + d});
      t += d + lab.typing_min_gap + exponential(rng, mean_gap);
    }
    return script;
  }

  std::array<double, data::kFingers> free_at{};  // earliest next onset per finger
  double                             t = uniform(rng, 0.3, 0.8);
  while (true)
  {
    // at most two concurrent intents: wait for the earliest release if needed
    std::vector<double> active;
    for (auto const &e : script.intents)
    {
      if (e.onset <= t && t < e.release)
      {
        active.push_back(e.release);
      }
    }
    if (active.size() >= 2)
    {
      t = *std::min_element(active.begin(), active.end());
      continue;
    }
    std::vector<std::size_t> candidates;
    for (std::size_t f = 0; f < data::kFingers; ++f)
    {
      if (free_at[f] <= t)
      {
        candidates.push_back(f);
      }
    }
    if (candidates.empty())
    {
      t = *std::min_element(free_at.begin(), free_at.end());
      continue;
    }
    double const d = uniform(rng, lab.piano_min_duration, lab.piano_max_duration);
    if (t + d > duration - tail)
    {
      break;
    }
    std::size_t const f = candidates[uniform_index(rng, candidates.size())];
    script.intents.push_back({f + 1, t, t + d});
    free_at[f] = t + d + lab.same_finger_gap;
    t += exponential(rng, 1.0 / lab.press_rate);
  }
  return script;
}

kin::Configuration rest_configuration(LabConstants const &lab)
{
  kin::Configuration x{};
  x[kin::kThumbMp] = lab.thumb_rest[0];
  x[kin::kThumbIp] = lab.thumb_rest[1];
  for (std::size_t ray = 1; ray <= 4; ++ray)
  {
    for (std::size_t m = 1; m <= 3; ++m)
    {
      x[kin::finger_joint(ray, m)] = lab.finger_rest[m - 1];
    }
  }
  x[kin::kWristRoll] = x[kin::kWristPitch] = x[kin::kWristYaw] = std::numbers::pi / 2;
  return x;
}

JointTrajectory joints_from_script(MotionScript const &script, double frame_rate, std::uint64_t drift_seed,
                                   LabConstants const &lab)
{
  if (!(frame_rate >= 15.0 && frame_rate <= 30.0))
  {
    throw Error("range", "frame rate must lie in [15, 30]");
  }
  double const ratio = script.task == data::Task::kTyping ? lab.typing_depth_ratio : 1.0;
  double const drift = script.task == data::Task::kTyping ? lab.wrist_drift_typing : lab.wrist_drift_piano;

  std::vector<FingerResponse> fingers;
  for (std::size_t f = 1; f <= data::kFingers; ++f)
  {
    fingers.emplace_back(script.intents, f, lab.time_constant);
  }
  Rng                  rng(drift_seed);
  std::array<Drift, 3> wrist;
  for (auto &d : wrist)
  {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
    {
      d.weight[j]    = uniform(rng, 0.2, 1.0);
      d.frequency[j] = uniform(rng, 0.03, 0.2);
      d.phase[j]     = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      sum += d.weight[j];
    }
    for (auto &w : d.weight)
    {
      w *= 0.5 / sum;  // sinusoids peak at 0.5, the offset adds up to 0.5 more
    }
    d.offset = uniform(rng, -0.5, 0.5);
  }

  // first-joint depth below rest, and the pressed threshold, per finger
  auto first_depth = [&](std::size_t f) { return f == 1 ? lab.thumb_depth[0] : lab.finger_depth[0]; };
  auto pressed     = [&](std::size_t f, double t) {
    double const flex = first_depth(f) * ratio * fingers[f - 1].at(t);
    return flex - lab.press_fraction * first_depth(f) > 0.0;
  };

  JointTrajectory traj;
  auto const      n = static_cast<std::size_t>(std::floor(script.duration * frame_rate));
  for (std::size_t i = 0; i < n; ++i)
  {
    double const       t = static_cast<double>(i) / frame_rate;
    kin::Configuration x{};
    double const       s1 = fingers[0].at(t);
    x[kin::kThumbMp]      = lab.thumb_rest[0] - lab.thumb_depth[0] * ratio * s1;
    x[kin::kThumbIp]      = lab.thumb_rest[1] - lab.thumb_depth[1] * ratio * s1;
    for (std::size_t ray = 1; ray <= 4; ++ray)
    {
      double const s = fingers[ray].at(t);
      for (std::size_t m = 1; m <= 3; ++m)
      {
        x[kin::finger_joint(ray, m)] = lab.finger_rest[m - 1] - lab.finger_depth[m - 1] * ratio * s;
      }
    }
    x[kin::kWristRoll]  = wrist[0].at(t, drift);
    x[kin::kWristPitch] = wrist[1].at(t, drift);
    x[kin::kWristYaw]   = wrist[2].at(t, drift);

    data::PressVector p{};
    for (std::size_t f = 1; f <= data::kFingers; ++f)
    {
      p[f - 1] = pressed(f, t) ? 1 : 0;
    }
    traj.times.push_back(t);
    traj.configs.push_back(x);
    traj.presses.push_back(p);
  }

  // events: maximal intervals where the threshold predicate holds, with
  // crossings located by bisection to adjacent doubles
  for (std::size_t f = 1; f <= data::kFingers; ++f)
  {
    auto crossing = [&](double lo, double hi) {
      bool const at_lo = pressed(f, lo);
      while (true)
      {
        double const mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
        {
          return hi;  // first representable time with the new state
        }
        (pressed(f, mid) == at_lo ? lo : hi) = mid;
      }
    };
    bool   state = false;
    double onset = 0.0;
    auto const steps = static_cast<std::size_t>(std::ceil(script.duration / kScanStep));
    for (std::size_t i = 1; i <= steps; ++i)
    {
      double const t0 = std::min(script.duration, static_cast<double>(i - 1) * kScanStep);
      double const t1 = std::min(script.duration, static_cast<double>(i) * kScanStep);
      bool const   now = pressed(f, t1);
      if (now == state)
      {
        continue;
      }
      double const c = crossing(t0, t1);
      if (now)
      {
        onset = c;
      }
      else
      {
        traj.events.push_back({f, onset, c});
      }
      state = now;
    }
    if (state)
    {
      traj.events.push_back({f, onset, script.duration});
    }
  }
  std::sort(traj.events.begin(), traj.events.end(), [](auto const &a, auto const &b) {
    return a.onset != b.onset ? a.onset < b.onset : a.finger < b.finger;
  });
  return traj;
}

}  // namespace finemotion::synth

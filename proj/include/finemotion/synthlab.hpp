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

#include "finemotion/datapipe.hpp"
#include "finemotion/kinematics.hpp"
#include "finemotion/rng.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace finemotion::synth {

/// Every invented constant of the synthetic lab in one record.
struct LabConstants
{
  double time_constant = 0.060;  // seconds, critically damped joint response

  // fingers 2..5: rest angles and flexion depth (radians) for piano presses
  std::array<double, 3> finger_rest{3.141592653589793, 3.141592653589793, 0.95 * 3.141592653589793};
  std::array<double, 3> finger_depth{1.0, 1.2, 0.6};
  // thumb MP/IP
  std::array<double, 2> thumb_rest{1.5707963267948966, 0.9 * 3.141592653589793};
  std::array<double, 2> thumb_depth{0.8, 0.6};

  double typing_depth_ratio = 0.7;  // typing targets are shallower
  /// A finger counts as pressed while its first joint is below
  /// rest - press_fraction * piano depth.
  double press_fraction = 0.2;

  double wrist_drift_typing = 0.05;  // radians, peak amplitude
  double wrist_drift_piano  = 0.15;

  double typing_min_duration = 0.08, typing_max_duration = 0.15;
  double piano_min_duration  = 0.20, piano_max_duration  = 0.60;
  double typing_min_gap      = 0.20;  // between consecutive typing intents
  double same_finger_gap     = 0.10;  // piano re-press of one finger
  double press_rate          = 1.5;   // intents per second
};

struct MotionScript
{
  data::Task                    task     = data::Task::kPiano;
  double                        duration = 0.0;
  std::vector<data::PressEvent> intents;
};

/// Seeded press intents at about `press_rate` per second. Typing intents
/// never overlap; piano has at most two concurrent intents and none on the
/// same finger.
MotionScript gen_motion_script(data::Task task, double duration, std::uint64_t seed,
                               LabConstants const &lab = {});

struct JointTrajectory
{
  std::vector<double>                 times;
  std::vector<kin::Configuration>     configs;
  std::vector<data::PressVector>      presses;  // thresholded first-joint angle at each frame
  std::vector<data::PressEvent>       events;   // continuous threshold-crossing intervals
};

/// Drives each finger from rest toward its flexed target while an intent is
/// active (critically damped second-order response), adds slow wrist drift
/// seeded by `drift_seed`, and samples at frame_rate.
JointTrajectory joints_from_script(MotionScript const &script, double frame_rate, std::uint64_t drift_seed,
                                   LabConstants const &lab = {});

/// Planar-segment hand placed by a rigid transform. Lengths in millimetres.
struct HandGeometry
{
  std::array<double, 3> finger_segments{45.0, 25.0, 20.0};
  std::array<double, 2> thumb_segments{40.0, 30.0};
  double                ray_spacing = 20.0;  // between MP markers
  kin::Vec3             anchor{-30.0, -80.0, 0.0};  // t5
  kin::Vec3             wrist{-10.0, -95.0, 0.0};   // t4
  double                forearm_marker = 60.0;      // t4 to t3
  double                elbow_distance = 200.0;     // t3 to e1
  double                elbow_span     = 40.0;      // e1 to e2
  kin::RigidTransform   placement;
};

/// Subject-specific geometry: segment lengths within +-10% and a random
/// placement in the capture volume.
HandGeometry random_geometry(std::uint64_t seed);

/// Forward kinematics. Wrist pitch and yaw must satisfy
/// cos^2(pitch) + cos^2(yaw) <= 1 (the forearm direction has unit length).
kin::MarkerFrame markers_from_config(kin::Configuration const &x, HandGeometry const &geometry = {},
                                     double time = 0.0);

/// Uniform angles in [0, pi] with pitch and yaw drawn from [pi/4, 3pi/4],
/// which keeps every draw reachable by markers_from_config.
kin::Configuration random_configuration(Rng &rng);

/// Rest pose of the lab (fingers straight, thumb and wrist at rest).
kin::Configuration rest_configuration(LabConstants const &lab = {});

/// Channels per band: centre shift, half-thickness change, intensity change,
/// tilt, lateral intensity gradient, lateral taper.
inline constexpr std::size_t kBandChannels = 6;
inline constexpr std::size_t kBands        = 5;

struct Band
{
  double centre    = 0.5;   // fraction of image height at rest
  double half      = 0.04;  // half-thickness at rest, fraction of height
  double intensity = 0.5;
  // gain[c][j]: channel c response to joint j of the band's group (flexion
  // measured from rest, radians)
  std::vector<std::array<double, kBandChannels>> gain;
};

struct Phenotype
{
  std::uint64_t             seed       = 0;
  std::array<Band, kBands>  bands;
  double                    sigma      = 0.2;
  double                    brightness = 0.12;
  kin::Configuration        rest{};
};

/// Joints driving each band: thumb, finger 2, finger 3, fingers 4 and 5, wrist.
std::vector<std::size_t> band_joints(std::size_t band);

Phenotype make_phenotype(std::uint64_t seed, double sigma, LabConstants const &lab = {});

/// Noise-free band image followed by multiplicative log-normal speckle
/// (scale sigma) and additive Gaussian noise (scale sigma/2), clamped to
/// [0, 1]. Row-major side x side.
std::vector<double> render_frame(kin::Configuration const &x, Phenotype const &phenotype, std::size_t side,
                                 Rng &rng);

data::GrayImage to_gray(std::vector<double> const &values, std::size_t side);

struct SessionRequest
{
  data::Task    task        = data::Task::kPiano;
  std::uint64_t seed        = 0;  // lab seed shared by every subject
  std::uint64_t subject     = 0;  // subject number within the lab
  std::size_t   index       = 0;  // session number for this subject and task
  double        duration    = 90.0;
  double        frame_rate  = 20.0;
  std::size_t   side        = 64;
  double        sigma       = 0.2;
};

std::string subject_name(std::uint64_t subject);
std::string session_name(SessionRequest const &request);

/// Script, trajectory, markers and images for one recording, all on one clock.
data::Session gen_session(SessionRequest const &request, LabConstants const &lab = {});

}  // namespace finemotion::synth

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

namespace finemotion::synth {
namespace {

// stream tags for derive_seed
enum : std::uint64_t
{
  kTagGeometry = 1,
  kTagPhenotype,
  kTagScript,
  kTagDrift,
  kTagNoise
};

std::uint64_t subject_seed(SessionRequest const &r)
{
  return derive_seed(r.seed, r.subject);
}

std::uint64_t session_seed(SessionRequest const &r)
{
  std::uint64_t const task = r.task == data::Task::kTyping ? 1 : 0;
  return derive_seed(derive_seed(subject_seed(r), 100 + task), 200 + r.index);
}

}  // namespace

std::string subject_name(std::uint64_t subject)
{
  return "subj" + std::to_string(subject);
}

std::string session_name(SessionRequest const &r)
{
  return subject_name(r.subject) + "-" + std::string(data::task_name(r.task)) + "-" + std::to_string(r.index);
}

data::Session gen_session(SessionRequest const &r, LabConstants const &lab)
{
  // geometry and phenotype belong to the subject; script, drift and noise to
  // the session
  HandGeometry const  geometry  = random_geometry(derive_seed(subject_seed(r), kTagGeometry));
  Phenotype const     phenotype = make_phenotype(derive_seed(subject_seed(r), kTagPhenotype), r.sigma, lab);
  std::uint64_t const seed      = session_seed(r);
  MotionScript const  script    = gen_motion_script(r.task, r.duration, derive_seed(seed, kTagScript), lab);
  JointTrajectory const traj    = joints_from_script(script, r.frame_rate, derive_seed(seed, kTagDrift), lab);

  data::Session s;
  s.id          = session_name(r);
  s.subject     = subject_name(r.subject);
  s.task        = r.task;
  s.frame_rate  = r.frame_rate;
  s.events.task = r.task;
  s.events.events = traj.events;
  Rng noise(derive_seed(seed, kTagNoise));
  for (std::size_t i = 0; i < traj.times.size(); ++i)
  {
    s.frame_times.push_back(traj.times[i]);
    s.frames.push_back(to_gray(render_frame(traj.configs[i], phenotype, r.side, noise), r.side));
    s.markers.push_back(markers_from_config(traj.configs[i], geometry, traj.times[i]));
  }
  data::validate(s);
  return s;
}

}  // namespace finemotion::synth

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

#include "finemotion/kinematics.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace finemotion::data {

inline constexpr std::size_t kFingers = 5;

enum class Task
{
  kPiano,
  kTyping
};
std::string_view task_name(Task task);
Task             parse_task(std::string_view name);

/// One key press; finger 1 is the thumb, 5 the little finger.
struct PressEvent
{
  std::size_t finger  = 1;
  double      onset   = 0.0;
  double      release = 0.0;

  friend bool operator==(PressEvent const &, PressEvent const &) = default;
};

struct PressEventStream
{
  Task                    task = Task::kPiano;
  std::vector<PressEvent> events;
};

/// Rejects events with onset >= release, fingers outside 1..5, and (typing)
/// any two overlapping events.
void validate(PressEventStream const &stream);

using PressVector = std::array<std::uint8_t, kFingers>;

/// Bit i set iff some event of finger i+1 has onset <= t < release.
PressVector press_vector_at(double t, std::vector<PressEvent> const &events);

/// 8-bit grayscale frame, row-major.
struct GrayImage
{
  std::size_t               width  = 0;
  std::size_t               height = 0;
  std::vector<std::uint8_t> pixels;
};

struct Session
{
  std::string              id;
  std::string              subject;
  Task                     task       = Task::kPiano;
  double                   frame_rate = 20.0;
  std::vector<double>      frame_times;  // strictly increasing
  std::vector<GrayImage>   frames;
  PressEventStream         events;
  std::vector<kin::MarkerFrame> markers;
};

/// Rejects empty or non-increasing frame clocks and rates outside [15, 30].
void validate(Session const &session);

/// Area-averaging resample to side x side, then rounding to 8 bits.
GrayImage area_downsample(GrayImage const &image, std::size_t side);

/// One session's frames after alignment: images as values in [0, 1] (exact
/// multiples of 1/255), configurations normalized by pi.
struct AlignedSequence
{
  std::string                                     session_id;
  std::string                                     subject;
  Task                                            task = Task::kPiano;
  std::vector<double>                             times;
  std::vector<std::vector<double>>                images;
  std::vector<std::array<double, kin::kJointCount>> configs;
  std::vector<PressVector>                        presses;
  std::size_t                                     dropped = 0;  // images with no marker frame in tolerance

  std::size_t size() const noexcept
  {
    return times.size();
  }
};

/// Pairs every image with the nearest marker frame within half a frame
/// period (otherwise the image is dropped) and with the press vector at its
/// timestamp.
AlignedSequence align(Session const &session, std::size_t side,
                      kin::AnchorTable const &anchors = kin::kDefaultAnchors);

struct WindowRef
{
  std::size_t sequence = 0;
  std::size_t start    = 0;

  friend bool operator==(WindowRef const &, WindowRef const &) = default;
};

/// Windows [l, l+k) for l = 0, stride, ... inside one sequence.
std::vector<WindowRef> build_windows(std::size_t sequence_length, std::size_t sequence_index, std::size_t k,
                                     std::size_t stride = 1);

struct Dataset
{
  std::size_t                  k      = 8;
  std::size_t                  stride = 1;
  std::size_t                  side   = 64;
  std::vector<AlignedSequence> sequences;
  std::vector<WindowRef>       windows;

  /// Rebuilds `windows` over every sequence for a new k.
  void rebuild_windows(std::size_t new_k, std::size_t new_stride = 1);
};

struct FoldPlan
{
  std::vector<std::vector<std::string>> folds;  // session ids per fold

  /// Fold holding `session_id`, or folds.size() when absent.
  std::size_t fold_of(std::string const &session_id) const;
};

struct SessionSize
{
  std::string id;
  std::size_t windows = 0;
};

/// Seeded greedy balance: sessions (shuffled by seed, then stably sorted by
/// size, largest first) each go to the currently lightest fold.
FoldPlan split_folds(std::vector<SessionSize> const &sessions, std::size_t n_folds = 5, std::uint64_t seed = 0);

/// Window count per sequence of a dataset.
std::vector<SessionSize> session_sizes(Dataset const &dataset);

// Binary container: see docs/formats.md.
void    save_dataset(Dataset const &dataset, std::filesystem::path const &path);
Dataset load_dataset(std::filesystem::path const &path);
void    write_dataset(Dataset const &dataset, std::ostream &out);
Dataset read_dataset(std::istream &in);

// Session directory (see docs/formats.md): session.json, index.csv,
// frames/*.pgm, events.csv, markers.csv.
void    write_session(Session const &session, std::filesystem::path const &dir);
Session read_session(std::filesystem::path const &dir);

void                    write_pgm(GrayImage const &image, std::ostream &out);
GrayImage               read_pgm(std::istream &in);
void                    write_events_csv(std::ostream &out, std::vector<PressEvent> const &events);
std::vector<PressEvent> read_events_csv(std::istream &in);

}  // namespace finemotion::data

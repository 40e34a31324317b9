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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace finemotion::replay {

using FrameProbabilities = std::array<double, data::kFingers>;

/// Per finger: threshold, close gaps of at most one frame, and turn every
/// maximal run into an event from its first frame time to one frame past its
/// last. Events are ordered by onset, then finger.
std::vector<data::PressEvent> extract_events(std::vector<FrameProbabilities> const &probabilities,
                                             double frame_rate, double threshold = 0.5);

/// Frame i carries 1 for finger f iff an event of f covers i / frame_rate.
std::vector<FrameProbabilities> rasterize(std::vector<data::PressEvent> const &events, std::size_t frames,
                                          double frame_rate);

/// Characters emitted at event onsets, thumb first in the key table.
std::string to_text(std::vector<data::PressEvent> const &events, std::array<std::string, 5> const &keys);

struct NoteEvent
{
  int           note     = 60;
  std::uint32_t on_tick  = 0;
  std::uint32_t off_tick = 0;

  friend bool operator==(NoteEvent const &, NoteEvent const &) = default;
};

inline constexpr std::uint16_t kDivision      = 480;     // ticks per quarter note
inline constexpr std::uint32_t kTempo         = 500000;  // microseconds per quarter (120 bpm)
inline constexpr double        kTicksPerSecond = 1e6 / kTempo * kDivision;

std::vector<NoteEvent> to_notes(std::vector<data::PressEvent> const &events, std::array<int, 5> const &notes);

/// Type-0 Standard MIDI File: one track, tempo meta event, note on/off on
/// channel 0 with velocity 64, end-of-track.
std::vector<std::uint8_t> write_midi(std::vector<NoteEvent> const &notes);

/// Parses format 0 or 1 files (all tracks merged), running status included.
/// Returns notes ordered by on tick, then note.
std::vector<NoteEvent> read_midi(std::vector<std::uint8_t> const &bytes);

/// Events back from notes given the note table; times are tick / kTicksPerSecond.
std::vector<data::PressEvent> notes_to_events(std::vector<NoteEvent> const &notes, std::array<int, 5> const &table);

}  // namespace finemotion::replay

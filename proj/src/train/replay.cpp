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
#include "finemotion/replay.hpp"

#include <algorithm>
#include <cmath>

namespace finemotion::replay {

std::vector<data::PressEvent> extract_events(std::vector<FrameProbabilities> const &probabilities,
                                             double frame_rate, double threshold)
{
  if (!(frame_rate > 0.0))
  {
    throw Error("range", "frame rate must be positive");
  }
  std::size_t const             n = probabilities.size();
  std::vector<data::PressEvent> events;
  for (std::size_t f = 0; f < data::kFingers; ++f)
  {
    std::vector<bool> on(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      on[i] = probabilities[i][f] >= threshold;
    }
    // close single-frame gaps between two pressed frames
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
      if (!on[i] && on[i - 1] && on[i + 1])
      {
        on[i] = true;
      }
    }
    for (std::size_t i = 0; i < n;)
    {
      if (!on[i])
      {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && on[j])
      {
        ++j;
      }
      events.push_back({f + 1, static_cast<double>(i) / frame_rate, static_cast<double>(j) / frame_rate});
      i = j;
    }
  }
  std::sort(events.begin(), events.end(), [](auto const &a, auto const &b) {
    return a.onset != b.onset ? a.onset < b.onset : a.finger < b.finger;
  });
  return events;
}

std::vector<FrameProbabilities> rasterize(std::vector<data::PressEvent> const &events, std::size_t frames,
                                          double frame_rate)
{
  std::vector<FrameProbabilities> out(frames);
  for (std::size_t i = 0; i < frames; ++i)
  {
    auto const p = data::press_vector_at(static_cast<double>(i) / frame_rate, events);
    for (std::size_t f = 0; f < data::kFingers; ++f)
    {
      out[i][f] = p[f];
    }
  }
  return out;
}

std::string to_text(std::vector<data::PressEvent> const &events, std::array<std::string, 5> const &keys)
{
  std::string text;
  for (auto const &e : events)
  {
    text += keys.at(e.finger - 1);
  }
  return text;
}

std::vector<NoteEvent> to_notes(std::vector<data::PressEvent> const &events, std::array<int, 5> const &notes)
{
  std::vector<NoteEvent> out;
  for (auto const &e : events)
  {
    auto const on  = static_cast<std::uint32_t>(std::llround(e.onset * kTicksPerSecond));
    auto const off = static_cast<std::uint32_t>(std::llround(e.release * kTicksPerSecond));
    out.push_back({notes.at(e.finger - 1), on, std::max(off, on + 1)});
  }
  return out;
}

std::vector<data::PressEvent> notes_to_events(std::vector<NoteEvent> const &notes, std::array<int, 5> const &table)
{
  std::vector<data::PressEvent> out;
  for (auto const &n : notes)
  {
    auto const it = std::find(table.begin(), table.end(), n.note);
    if (it == table.end())
    {
      throw Error("range", "note " + std::to_string(n.note) + " is not mapped to a finger");
    }
    out.push_back({static_cast<std::size_t>(it - table.begin()) + 1, n.on_tick / kTicksPerSecond,
                   n.off_tick / kTicksPerSecond});
  }
  std::sort(out.begin(), out.end(), [](auto const &a, auto const &b) {
    return a.onset != b.onset ? a.onset < b.onset : a.finger < b.finger;
  });
  return out;
}

}  // namespace finemotion::replay

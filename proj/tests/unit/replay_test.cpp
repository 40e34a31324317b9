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
#include "finemotion/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace finemotion;
using namespace finemotion::replay;

namespace {

std::vector<FrameProbabilities> one_finger(std::vector<double> const &p, std::size_t finger = 0)
{
  std::vector<FrameProbabilities> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    out[i][finger] = p[i];
  }
  return out;
}

// Events on the frame grid, at least one frame long and two frames apart per
// finger.
std::vector<data::PressEvent> random_stream(Rng &rng, std::size_t frames, double rate)
{
  std::vector<data::PressEvent> events;
  for (std::size_t f = 1; f <= 5; ++f)
  {
    std::size_t i = uniform_index(rng, 6);
    while (true)
    {
      std::size_t const len = 1 + uniform_index(rng, 8);
      if (i + len > frames)
      {
        break;
      }
      events.push_back({f, static_cast<double>(i) / rate, static_cast<double>(i + len) / rate});
      i += len + 2 + uniform_index(rng, 10);
    }
  }
  std::sort(events.begin(), events.end(), [](auto const &a, auto const &b) {
    return a.onset != b.onset ? a.onset < b.onset : a.finger < b.finger;
  });
  return events;
}

}  // namespace

TEST(Replay, SingleRunAtTwentyFps)
{
  auto const e = extract_events(one_finger({0.1, 0.9, 0.9, 0.1}), 20.0);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].finger, 1u);
  EXPECT_DOUBLE_EQ(e[0].onset, 0.05);
  EXPECT_DOUBLE_EQ(e[0].release, 0.15);
}

TEST(Replay, OneFrameGapsMergeLongerGapsSplit)
{
  EXPECT_EQ(extract_events(one_finger({0.9, 0.2, 0.9}, 2), 20.0).size(), 1u);
  auto const two = extract_events(one_finger({0.9, 0.2, 0.2, 0.9}, 2), 20.0);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].finger, 3u);
  EXPECT_DOUBLE_EQ(two[1].onset, 0.15);
  // a run touching the last frame ends one frame past it
  auto const tail = extract_events(one_finger({0.1, 0.6}), 10.0);
  ASSERT_EQ(tail.size(), 1u);
  EXPECT_DOUBLE_EQ(tail[0].release, 0.2);
}

TEST(Replay, QuietInputGivesNothing)
{
  std::vector<FrameProbabilities> p(50);
  for (auto &row : p)
  {
    row.fill(0.49);
  }
  EXPECT_TRUE(extract_events(p, 20.0).empty());
  EXPECT_TRUE(extract_events({}, 20.0).empty());
  EXPECT_THROW(extract_events(p, 0.0), Error);
}

TEST(Replay, RasterizeThenExtractIsIdentity)
{
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial)
  {
    double const      rate   = trial % 2 == 0 ? 20.0 : 30.0;
    std::size_t const frames = 20 + uniform_index(rng, 200);
    auto const        events = random_stream(rng, frames, rate);
    auto const        back   = extract_events(rasterize(events, frames, rate), rate);
    ASSERT_EQ(back, events) << "trial " << trial;
  }
}

TEST(Replay, EventsAreWellFormed)
{
  Rng                             rng(8);
  std::vector<FrameProbabilities> p(300);
  for (auto &row : p)
  {
    for (auto &v : row)
    {
      v = uniform01(rng);
    }
  }
  auto const events = extract_events(p, 20.0);
  data::PressEventStream stream;
  stream.events = events;
  EXPECT_NO_THROW(data::validate(stream));
  for (auto const &e : events)
  {
    EXPECT_LT(e.onset, e.release);
  }
}

TEST(Replay, TypingText)
{
  std::array<std::string, 5> const keys{" ", "j", "k", "l", ";"};
  std::vector<data::PressEvent> const events{{2, 0.0, 0.1}, {3, 0.2, 0.3}, {1, 0.4, 0.5}, {5, 0.6, 0.7}};
  EXPECT_EQ(to_text(events, keys), "jk ;");
  EXPECT_EQ(to_text({}, keys), "");
}

TEST(Midi, TimingConstants)
{
  EXPECT_EQ(kTicksPerSecond, 960.0);
  auto const notes = to_notes({{1, 0.5, 1.0}, {5, 1.0, 1.25}}, {60, 62, 64, 65, 67});
  ASSERT_EQ(notes.size(), 2u);
  EXPECT_EQ(notes[0], (NoteEvent{60, 480, 960}));
  EXPECT_EQ(notes[1], (NoteEvent{67, 960, 1200}));
}

TEST(Midi, HeaderBytes)
{
  auto const bytes = write_midi({{60, 0, 480}});
  std::vector<std::uint8_t> const head{'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xE0};
  ASSERT_GE(bytes.size(), head.size());
  EXPECT_TRUE(std::equal(head.begin(), head.end(), bytes.begin()));
  // tempo meta event: FF 51 03 07 A1 20
  std::vector<std::uint8_t> const tempo{0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20};
  EXPECT_TRUE(std::equal(tempo.begin(), tempo.end(), bytes.begin() + 22));
  std::vector<std::uint8_t> const end{0x00, 0xFF, 0x2F, 0x00};
  EXPECT_TRUE(std::equal(end.begin(), end.end(), bytes.end() - 4));
}

TEST(Midi, ParsesRunningStatusAndZeroVelocityOff)
{
  std::vector<std::uint8_t> track{
    0x00, 0x90, 60, 100,  // note on
    0x10, 62, 90,         // running status note on at tick 16
    0x83, 0x60, 60, 0,    // tick 16 + 480: note 60 off by velocity 0
    0x00, 0x80, 62, 0,    // note 62 off
    0x00, 0xFF, 0x2F, 0x00};
  std::vector<std::uint8_t> bytes{'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xE0, 'M', 'T', 'r', 'k', 0, 0, 0,
                                  static_cast<std::uint8_t>(track.size())};
  bytes.insert(bytes.end(), track.begin(), track.end());
  auto const notes = read_midi(bytes);
  ASSERT_EQ(notes.size(), 2u);
  EXPECT_EQ(notes[0], (NoteEvent{60, 0, 496}));
  EXPECT_EQ(notes[1], (NoteEvent{62, 16, 496}));
}

TEST(Midi, RejectsMalformedFiles)
{
  auto bytes = write_midi({{60, 0, 480}});
  EXPECT_THROW(read_midi({bytes.begin(), bytes.begin() + 10}), Error);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 6);
  EXPECT_THROW(read_midi(truncated), Error);
  auto bad = bytes;
  bad[0]   = 'X';
  EXPECT_THROW(read_midi(bad), Error);
  EXPECT_THROW(write_midi({{60, 10, 10}}), Error);
}

TEST(Midi, RoundTripWithinOneTick)
{
  std::array<int, 5> const table{60, 62, 64, 65, 67};
  Rng                      rng(77);
  for (int trial = 0; trial < 1000; ++trial)
  {
    auto const events = random_stream(rng, 400, 20.0);
    auto const back   = notes_to_events(read_midi(write_midi(to_notes(events, table))), table);
    ASSERT_EQ(back.size(), events.size());
    for (std::size_t i = 0; i < events.size(); ++i)
    {
      EXPECT_EQ(back[i].finger, events[i].finger);
      EXPECT_LE(std::abs(back[i].onset - events[i].onset), 1.0 / kTicksPerSecond);
      EXPECT_LE(std::abs(back[i].release - events[i].release), 1.0 / kTicksPerSecond);
    }
  }
}

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
#include "finemotion/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numbers>
#include <sstream>

using namespace finemotion;
using namespace finemotion::data;

namespace {

// Marker frame with a valid, nondegenerate geometry; the values only need to
// be extractable.
kin::MarkerFrame valid_markers(double t, Rng &rng)
{
  kin::MarkerFrame f;
  f.time = t;
  for (std::size_t i = 0; i < kin::kMarkerCount; ++i)
  {
    f.set(static_cast<kin::Marker>(i), {uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -50, 50)});
  }
  return f;
}

Session make_session(std::string id, std::size_t frames, double rate, std::uint64_t seed)
{
  Rng     rng(seed);
  Session s;
  s.id         = std::move(id);
  s.subject    = "s1";
  s.task       = Task::kPiano;
  s.frame_rate = rate;
  for (std::size_t i = 0; i < frames; ++i)
  {
    double const t = static_cast<double>(i) / rate;
    s.frame_times.push_back(t);
    GrayImage img{16, 16, std::vector<std::uint8_t>(256)};
    for (auto &p : img.pixels)
    {
      p = static_cast<std::uint8_t>(uniform_index(rng, 256));
    }
    s.frames.push_back(img);
    s.markers.push_back(valid_markers(t, rng));
  }
  s.events.task   = Task::kPiano;
  s.events.events = {{2, 0.1, 0.4}, {4, 0.2, 0.5}};
  return s;
}

std::filesystem::path temp_dir(std::string const &name)
{
  auto const dir = std::filesystem::temp_directory_path() / ("finemotion_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(PressVector, IntervalPredicate)
{
  std::vector<PressEvent> events{{3, 1.0, 2.0}};
  EXPECT_EQ(press_vector_at(0.5, events), (PressVector{0, 0, 0, 0, 0}));
  EXPECT_EQ(press_vector_at(1.5, events), (PressVector{0, 0, 1, 0, 0}));
  EXPECT_EQ(press_vector_at(1.0, events), (PressVector{0, 0, 1, 0, 0}));
  EXPECT_EQ(press_vector_at(2.0, events), (PressVector{0, 0, 0, 0, 0}));
  std::vector<PressEvent> piano{{2, 1.0, 3.0}, {4, 2.0, 4.0}};
  EXPECT_EQ(press_vector_at(2.5, piano), (PressVector{0, 1, 0, 1, 0}));
}

TEST(PressEvents, Validation)
{
  EXPECT_NO_THROW(validate(PressEventStream{Task::kPiano, {{1, 0, 1}, {2, 0.5, 1.5}}}));
  EXPECT_THROW(validate(PressEventStream{Task::kTyping, {{1, 0, 1}, {2, 0.5, 1.5}}}), Error);
  EXPECT_NO_THROW(validate(PressEventStream{Task::kTyping, {{1, 0, 1}, {2, 1.0, 1.5}}}));
  EXPECT_THROW(validate(PressEventStream{Task::kPiano, {{0, 0, 1}}}), Error);
  EXPECT_THROW(validate(PressEventStream{Task::kPiano, {{6, 0, 1}}}), Error);
  EXPECT_THROW(validate(PressEventStream{Task::kPiano, {{1, 1, 1}}}), Error);
}

TEST(PressEvents, CsvRoundTrip)
{
  std::vector<PressEvent> events{{1, 0.125, 0.5}, {5, 1.0 / 3.0, 2.0}};
  std::stringstream       buf;
  write_events_csv(buf, events);
  EXPECT_EQ(read_events_csv(buf), events);
  std::stringstream bad("finger,onset_s,release_s\n1,x,2\n");
  EXPECT_THROW(read_events_csv(bad), Error);
}

TEST(Session, Validation)
{
  Session s = make_session("a", 4, 20, 1);
  EXPECT_NO_THROW(validate(s));
  s.frame_rate = 40;
  EXPECT_THROW(validate(s), Error);
  s.frame_rate     = 20;
  s.frame_times[2] = s.frame_times[1];
  EXPECT_THROW(validate(s), Error);
}

TEST(AreaDownsample, ConstantAndAverage)
{
  GrayImage white{8, 8, std::vector<std::uint8_t>(64, 255)};
  auto      small = area_downsample(white, 3);
  for (auto p : small.pixels)
  {
    EXPECT_EQ(p, 255);
  }
  GrayImage checker{2, 2, {0, 100, 200, 50}};
  EXPECT_EQ(area_downsample(checker, 1).pixels[0], 88);  // 350 / 4 = 87.5, rounded
  EXPECT_THROW(area_downsample(checker, 0), Error);
  EXPECT_THROW(area_downsample(checker, 3), Error);  // would upsample
}

TEST(Align, ExactMarkersKeepEveryFrameAndScaleImages)
{
  Session s = make_session("a", 12, 20, 2);
  for (auto &f : s.frames)
  {
    std::fill(f.pixels.begin(), f.pixels.end(), 255);
  }
  auto const seq = align(s, 8);
  EXPECT_EQ(seq.size(), 12u);
  EXPECT_EQ(seq.dropped, 0u);
  for (auto const &img : seq.images)
  {
    ASSERT_EQ(img.size(), 64u);
    for (double v : img)
    {
      EXPECT_EQ(v, 1.0);
    }
  }
  EXPECT_EQ(seq.times, s.frame_times);
  EXPECT_EQ(seq.presses[3], press_vector_at(s.frame_times[3], s.events.events));
  auto const expect = kin::normalize_configuration(kin::extract_configuration(s.markers[5]));
  EXPECT_EQ(seq.configs[5], expect);
}

TEST(Align, DropsFramesBeyondHalfPeriod)
{
  Session s = make_session("a", 6, 20, 3);
  // frame 3's marker sits 0.6 periods away; nothing else is closer
  s.markers[3].time += 0.6 / 20.0;
  auto const seq = align(s, 8);
  EXPECT_EQ(seq.dropped, 1u);
  EXPECT_EQ(seq.size(), 5u);
  EXPECT_EQ(std::count(seq.times.begin(), seq.times.end(), s.frame_times[3]), 0);
}

TEST(Align, UsesNearestMarkerMonotonically)
{
  Rng     rng(4);
  Session s = make_session("a", 10, 20, 4);
  // a denser marker stream: 100 Hz with jitter
  s.markers.clear();
  for (int i = 0; i < 60; ++i)
  {
    s.markers.push_back(valid_markers(0.01 * i + uniform(rng, -0.002, 0.002), rng));
  }
  std::sort(s.markers.begin(), s.markers.end(), [](auto const &a, auto const &b) { return a.time < b.time; });
  auto const seq = align(s, 8);
  ASSERT_EQ(seq.size(), 10u);
  std::size_t previous = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
  {
    // brute-force nearest marker
    std::size_t best = 0;
    for (std::size_t m = 1; m < s.markers.size(); ++m)
    {
      if (std::abs(s.markers[m].time - seq.times[i]) < std::abs(s.markers[best].time - seq.times[i]))
      {
        best = m;
      }
    }
    EXPECT_GE(best, previous);
    previous = best;
    EXPECT_EQ(seq.configs[i], kin::normalize_configuration(kin::extract_configuration(s.markers[best])));
  }
}

TEST(Align, RejectsDisjointStreams)
{
  Session s = make_session("a", 6, 20, 5);
  for (auto &m : s.markers)
  {
    m.time += 100.0;
  }
  try
  {
    align(s, 8);
    FAIL();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.code(), "align");
  }
}

TEST(Windows, Counts)
{
  EXPECT_EQ(build_windows(10, 0, 8).size(), 3u);
  EXPECT_EQ(build_windows(10, 0, 8)[2], (WindowRef{0, 2}));
  EXPECT_EQ(build_windows(8, 0, 8).size(), 1u);
  EXPECT_TRUE(build_windows(7, 0, 8).empty());
  EXPECT_EQ(build_windows(10, 0, 2, 3).size(), 3u);  // starts 0, 3, 6
  EXPECT_THROW(build_windows(10, 0, 0), Error);
}

TEST(Windows, NeverCrossSessions)
{
  Dataset ds;
  for (std::size_t n : {5, 9, 3, 12})
  {
    AlignedSequence seq;
    seq.times.resize(n);
    ds.sequences.push_back(seq);
  }
  ds.rebuild_windows(4);
  EXPECT_EQ(ds.windows.size(), 2u + 6u + 0u + 9u);
  for (auto const &w : ds.windows)
  {
    EXPECT_LE(w.start + 4, ds.sequences[w.sequence].size());
  }
}

TEST(Folds, EqualSessionsOnePerFold)
{
  std::vector<SessionSize> sizes;
  for (int i = 0; i < 5; ++i)
  {
    sizes.push_back({"s" + std::to_string(i), 10});
  }
  auto const plan = split_folds(sizes, 5, 3);
  for (auto const &f : plan.folds)
  {
    EXPECT_EQ(f.size(), 1u);
  }
}

TEST(Folds, GreedyBalanceAndDisjointness)
{
  std::vector<SessionSize> sizes;
  for (std::size_t i = 1; i <= 10; ++i)
  {
    sizes.push_back({"s" + std::to_string(i), i});
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed)
  {
    auto const plan = split_folds(sizes, 5, seed);
    std::vector<std::size_t> load;
    std::size_t              members = 0;
    for (auto const &fold : plan.folds)
    {
      EXPECT_FALSE(fold.empty());
      std::size_t l = 0;
      for (auto const &id : fold)
      {
        l += std::stoul(id.substr(1));
      }
      load.push_back(l);
      members += fold.size();
    }
    EXPECT_EQ(members, 10u);
    for (auto const &s : sizes)
    {
      EXPECT_LT(plan.fold_of(s.id), 5u);
    }
    double const ratio = static_cast<double>(*std::max_element(load.begin(), load.end())) /
                         static_cast<double>(*std::min_element(load.begin(), load.end()));
    EXPECT_LE(ratio, 1.5);
    EXPECT_EQ(plan.folds, split_folds(sizes, 5, seed).folds);
  }
  EXPECT_THROW(split_folds({{"a", 1}}, 5, 0), Error);
}

TEST(Dataset, RoundTripPreservesEverything)
{
  Dataset ds;
  ds.k    = 4;
  ds.side = 8;
  ds.sequences.push_back(align(make_session("alpha", 10, 20, 6), 8));
  ds.sequences.push_back(align(make_session("beta", 7, 25, 7), 8));
  ds.sequences[1].task = Task::kTyping;
  ds.rebuild_windows(4);

  std::stringstream buf;
  write_dataset(ds, buf);
  Dataset const back = read_dataset(buf);
  EXPECT_EQ(back.k, 4u);
  EXPECT_EQ(back.side, 8u);
  EXPECT_EQ(back.windows, ds.windows);
  ASSERT_EQ(back.sequences.size(), 2u);
  for (std::size_t q = 0; q < 2; ++q)
  {
    auto const &a = ds.sequences[q];
    auto const &b = back.sequences[q];
    EXPECT_EQ(b.session_id, a.session_id);
    EXPECT_EQ(b.task, a.task);
    EXPECT_EQ(b.presses, a.presses);
    EXPECT_EQ(b.images, a.images);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
      for (std::size_t j = 0; j < kin::kJointCount; ++j)
      {
        EXPECT_NEAR(b.configs[i][j], a.configs[i][j], 1e-7);
      }
    }
  }
}

TEST(Dataset, EmptyRoundTrip)
{
  Dataset           ds;
  std::stringstream buf;
  write_dataset(ds, buf);
  Dataset const back = read_dataset(buf);
  EXPECT_TRUE(back.sequences.empty());
  EXPECT_TRUE(back.windows.empty());
}

TEST(Dataset, TruncationReportsOffset)
{
  Dataset ds;
  ds.side = 8;
  ds.sequences.push_back(align(make_session("alpha", 10, 20, 8), 8));
  ds.rebuild_windows(4);
  std::stringstream buf;
  write_dataset(ds, buf);
  std::string const full = buf.str();
  for (std::size_t cut : {std::size_t{2}, std::size_t{30}, full.size() - 10})
  {
    std::stringstream truncated(full.substr(0, cut));
    try
    {
      read_dataset(truncated);
      FAIL() << cut;
    }
    catch (Error const &e)
    {
      EXPECT_EQ(e.code(), "parse");
      EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
  }
  std::string bad_magic = full;
  bad_magic[0]          = 'X';
  std::stringstream in(bad_magic);
  EXPECT_THROW(read_dataset(in), Error);
}

TEST(SessionDirectory, RoundTrip)
{
  auto const    dir = temp_dir("session_rt");
  Session const s   = make_session("gamma", 5, 20, 9);
  write_session(s, dir);
  Session const back = read_session(dir);
  EXPECT_EQ(back.id, s.id);
  EXPECT_EQ(back.frame_times, s.frame_times);
  EXPECT_EQ(back.events.events, s.events.events);
  ASSERT_EQ(back.frames.size(), s.frames.size());
  EXPECT_EQ(back.frames[4].pixels, s.frames[4].pixels);
  EXPECT_EQ(back.markers[2].positions, s.markers[2].positions);
  std::filesystem::remove_all(dir);
}

TEST(Pgm, RoundTripAndRejects)
{
  GrayImage         img{3, 2, {1, 2, 3, 4, 5, 255}};
  std::stringstream buf;
  write_pgm(img, buf);
  auto const back = read_pgm(buf);
  EXPECT_EQ(back.width, 3u);
  EXPECT_EQ(back.pixels, img.pixels);
  std::stringstream bad("P2\n1 1\n255\n0");
  EXPECT_THROW(read_pgm(bad), Error);
}

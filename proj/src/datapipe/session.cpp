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
#include "finemotion/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace finemotion::data {
namespace {

using json = nlohmann::json;

std::ifstream open_in(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("io", "cannot open '" + path.string() + "' for reading");
  }
  return in;
}

std::ofstream open_out(std::filesystem::path const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("io", "cannot open '" + path.string() + "' for writing");
  }
  return out;
}

std::string frame_name(std::size_t index)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.pgm", index);
  return buf;
}

}  // namespace

void validate(Session const &session)
{
  if (!(session.frame_rate >= 15.0 && session.frame_rate <= 30.0))
  {
    throw Error("range", "session '" + session.id + "' frame rate " + format_double(session.frame_rate) +
                             " outside [15, 30]");
  }
  if (session.frame_times.empty() || session.frame_times.size() != session.frames.size())
  {
    throw Error("range", "session '" + session.id + "' needs one timestamp per frame and at least one frame");
  }
  for (std::size_t i = 1; i < session.frame_times.size(); ++i)
  {
    if (!(session.frame_times[i] > session.frame_times[i - 1]))
    {
      throw Error("range", "session '" + session.id + "' image timestamps not strictly increasing at frame " +
                               std::to_string(i));
    }
  }
  validate(session.events);
}

GrayImage area_downsample(GrayImage const &image, std::size_t side)
{
  if (side == 0 || image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height)
  {
    throw Error("shape", "cannot resample a " + std::to_string(image.width) + "x" +
                             std::to_string(image.height) + " image to side " + std::to_string(side));
  }
  if (side > image.width || side > image.height)
  {
    throw Error("shape", "resampling a " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                             " image to side " + std::to_string(side) + " would upsample");
  }
  if (image.width == side && image.height == side)
  {
    return image;
  }
  // each output pixel averages the source area it covers, with fractional
  // weights on partially covered source pixels
  auto weights = [](std::size_t src, std::size_t dst) {
    std::vector<std::vector<std::pair<std::size_t, double>>> table(dst);
    double const scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t o = 0; o < dst; ++o)
    {
      double const lo = static_cast<double>(o) * scale;
      double const hi = lo + scale;
      for (auto s = static_cast<std::size_t>(lo); s < src && static_cast<double>(s) < hi; ++s)
      {
        double const w = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
        if (w > 0.0)
        {
          table[o].emplace_back(s, w / scale);
        }
      }
    }
    return table;
  };
  auto const rows = weights(image.height, side);
  auto const cols = weights(image.width, side);
  GrayImage  out{side, side, std::vector<std::uint8_t>(side * side)};
  for (std::size_t r = 0; r < side; ++r)
  {
    for (std::size_t c = 0; c < side; ++c)
    {
      double sum = 0.0;
      for (auto const &[sr, wr] : rows[r])
      {
        for (auto const &[sc, wc] : cols[c])
        {
          sum += wr * wc * image.pixels[sr * image.width + sc];
        }
      }
      out.pixels[r * side + c] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(sum), 0, 255));
    }
  }
  return out;
}

AlignedSequence align(Session const &session, std::size_t side, kin::AnchorTable const &anchors)
{
  validate(session);
  AlignedSequence seq;
  seq.session_id = session.id;
  seq.subject    = session.subject;
  seq.task       = session.task;

  auto const &markers = session.markers;
  double const tolerance = 0.5 / session.frame_rate;
  if (markers.empty() || markers.back().time < session.frame_times.front() - tolerance ||
      markers.front().time > session.frame_times.back() + tolerance)
  {
    throw Error("align", "session '" + session.id + "': marker stream does not overlap the image stream");
  }
  for (std::size_t i = 1; i < markers.size(); ++i)
  {
    if (markers[i].time < markers[i - 1].time)
    {
      throw Error("align", "session '" + session.id + "': marker timestamps decrease at row " + std::to_string(i));
    }
  }

  std::size_t m = 0;
  for (std::size_t i = 0; i < session.frames.size(); ++i)
  {
    double const t = session.frame_times[i];
    // markers are sorted and image times increase, so the nearest index only moves forward
    while (m + 1 < markers.size() && std::abs(markers[m + 1].time - t) <= std::abs(markers[m].time - t))
    {
      ++m;
    }
    if (std::abs(markers[m].time - t) > tolerance)
    {
      ++seq.dropped;
      continue;
    }
    GrayImage const     small = area_downsample(session.frames[i], side);
    std::vector<double> pixels(small.pixels.size());
    std::transform(small.pixels.begin(), small.pixels.end(), pixels.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
    seq.times.push_back(t);
    seq.images.push_back(std::move(pixels));
    seq.configs.push_back(kin::normalize_configuration(kin::extract_configuration(markers[m], anchors)));
    seq.presses.push_back(press_vector_at(t, session.events.events));
  }
  if (seq.times.empty())
  {
    throw Error("align", "session '" + session.id + "': every image was dropped during alignment");
  }
  return seq;
}

std::vector<WindowRef> build_windows(std::size_t sequence_length, std::size_t sequence_index, std::size_t k,
                                     std::size_t stride)
{
  if (k < 1 || stride < 1)
  {
    throw Error("range", "window length and stride must be at least 1");
  }
  std::vector<WindowRef> windows;
  for (std::size_t start = 0; start + k <= sequence_length; start += stride)
  {
    windows.push_back({sequence_index, start});
  }
  return windows;
}

void Dataset::rebuild_windows(std::size_t new_k, std::size_t new_stride)
{
  k      = new_k;
  stride = new_stride;
  windows.clear();
  for (std::size_t s = 0; s < sequences.size(); ++s)
  {
    auto const w = build_windows(sequences[s].size(), s, k, stride);
    windows.insert(windows.end(), w.begin(), w.end());
  }
}

std::size_t FoldPlan::fold_of(std::string const &session_id) const
{
  for (std::size_t f = 0; f < folds.size(); ++f)
  {
    if (std::find(folds[f].begin(), folds[f].end(), session_id) != folds[f].end())
    {
      return f;
    }
  }
  return folds.size();
}

FoldPlan split_folds(std::vector<SessionSize> const &sessions, std::size_t n_folds, std::uint64_t seed)
{
  if (n_folds == 0 || sessions.size() < n_folds)
  {
    throw Error("range", "cannot split " + std::to_string(sessions.size()) + " sessions into " +
                             std::to_string(n_folds) + " folds");
  }
  auto order = sessions;
  Rng  rng(seed);
  shuffle(order, rng);
  std::stable_sort(order.begin(), order.end(), [](auto const &a, auto const &b) { return a.windows > b.windows; });

  FoldPlan                 plan;
  std::vector<std::size_t> load(n_folds, 0);
  plan.folds.resize(n_folds);
  for (auto const &s : order)
  {
    // prefer empty folds so every fold gets a session
    std::size_t best = 0;
    for (std::size_t f = 1; f < n_folds; ++f)
    {
      bool const empty_f = plan.folds[f].empty(), empty_b = plan.folds[best].empty();
      if ((empty_f && !empty_b) || (empty_f == empty_b && load[f] < load[best]))
      {
        best = f;
      }
    }
    plan.folds[best].push_back(s.id);
    load[best] += s.windows;
  }
  return plan;
}

std::vector<SessionSize> session_sizes(Dataset const &dataset)
{
  std::vector<SessionSize> sizes;
  for (auto const &seq : dataset.sequences)
  {
    sizes.push_back({seq.session_id, 0});
  }
  for (auto const &w : dataset.windows)
  {
    ++sizes[w.sequence].windows;
  }
  return sizes;
}

void write_pgm(GrayImage const &image, std::ostream &out)
{
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<char const *>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

GrayImage read_pgm(std::istream &in)
{
  // header tokens separated by whitespace, '#' comments allowed
  auto token = [&]() {
    std::string t;
    while (true)
    {
      int c = in.get();
      if (c == EOF)
      {
        break;
      }
      if (c == '#')
      {
        while (c != '\n' && c != EOF)
        {
          c = in.get();
        }
        continue;
      }
      if (std::isspace(c))
      {
        if (!t.empty())
        {
          break;
        }
        continue;
      }
      t.push_back(static_cast<char>(c));
    }
    return t;
  };
  if (token() != "P5")
  {
    throw Error("parse", "PGM: expected binary 'P5' magic");
  }
  GrayImage img;
  img.width  = parse_size(token(), "PGM width");
  img.height = parse_size(token(), "PGM height");
  if (parse_size(token(), "PGM maxval") != 255 || img.width == 0 || img.height == 0)
  {
    throw Error("parse", "PGM: only non-empty 8-bit images (maxval 255) are supported");
  }
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char *>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
  {
    throw Error("parse", "PGM: pixel data truncated");
  }
  return img;
}

void write_session(Session const &session, std::filesystem::path const &dir)
{
  validate(session);
  std::filesystem::create_directories(dir / "frames");
  json meta = {{"id", session.id},
               {"subject", session.subject},
               {"task", task_name(session.task)},
               {"frame_rate", session.frame_rate},
               {"frame_count", session.frames.size()}};
  open_out(dir / "session.json") << meta.dump(2) << '\n';

  auto index = open_out(dir / "index.csv");
  index << "frame,time_s\n";
  for (std::size_t i = 0; i < session.frames.size(); ++i)
  {
    auto const name = frame_name(i);
    index << name << ',' << format_double(session.frame_times[i]) << '\n';
    auto out = open_out(dir / "frames" / name);
    write_pgm(session.frames[i], out);
  }
  auto events = open_out(dir / "events.csv");
  write_events_csv(events, session.events.events);
  auto markers = open_out(dir / "markers.csv");
  kin::write_marker_csv(markers, session.markers);
}

Session read_session(std::filesystem::path const &dir)
{
  Session session;
  try
  {
    auto       in   = open_in(dir / "session.json");
    json const meta = json::parse(in);
    session.id         = meta.at("id").get<std::string>();
    session.subject    = meta.at("subject").get<std::string>();
    session.task       = parse_task(meta.at("task").get<std::string>());
    session.frame_rate = meta.at("frame_rate").get<double>();
  }
  catch (json::exception const &e)
  {
    throw Error("parse", "session.json in '" + dir.string() + "': " + e.what());
  }
  session.events.task = session.task;

  auto        index = open_in(dir / "index.csv");
  std::string line;
  if (!read_line(index, line) || line != "frame,time_s")
  {
    throw Error("parse", "index.csv: header must be 'frame,time_s'");
  }
  while (read_line(index, line))
  {
    if (line.empty())
    {
      continue;
    }
    auto const f = split_fields(line);
    if (f.size() != 2)
    {
      throw Error("parse", "index.csv: expected 'frame,time_s' rows, got '" + line + "'");
    }
    auto frame = open_in(dir / "frames" / std::string(f[0]));
    session.frames.push_back(read_pgm(frame));
    session.frame_times.push_back(parse_double(f[1], "index.csv time_s"));
  }
  auto events           = open_in(dir / "events.csv");
  session.events.events = read_events_csv(events);
  auto markers          = open_in(dir / "markers.csv");
  session.markers       = kin::read_marker_csv(markers);
  validate(session);
  return session;
}

}  // namespace finemotion::data

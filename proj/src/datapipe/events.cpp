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
#include "finemotion/text.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace finemotion::data {

std::string_view task_name(Task task)
{
  return task == Task::kPiano ? "piano" : "typing";
}

Task parse_task(std::string_view name)
{
  if (name == "piano")
  {
    return Task::kPiano;
  }
  if (name == "typing")
  {
    return Task::kTyping;
  }
  throw Error("parse", "unknown task '" + std::string(name) + "' (expected piano or typing)");
}

void validate(PressEventStream const &stream)
{
  for (auto const &e : stream.events)
  {
    if (e.finger < 1 || e.finger > kFingers)
    {
      throw Error("range", "press event finger " + std::to_string(e.finger) + " outside 1..5");
    }
    if (!(e.onset < e.release))
    {
      throw Error("range", "press event of finger " + std::to_string(e.finger) + " has onset " +
                               format_double(e.onset) + " >= release " + format_double(e.release));
    }
  }
  if (stream.task != Task::kTyping)
  {
    return;
  }
  auto sorted = stream.events;
  std::sort(sorted.begin(), sorted.end(), [](auto const &a, auto const &b) { return a.onset < b.onset; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
  {
    if (sorted[i].onset < sorted[i - 1].release)
    {
      throw Error("range", "typing events overlap at t=" + format_double(sorted[i].onset));
    }
  }
}

PressVector press_vector_at(double t, std::vector<PressEvent> const &events)
{
  PressVector bits{};
  for (auto const &e : events)
  {
    if (e.onset <= t && t < e.release && e.finger >= 1 && e.finger <= kFingers)
    {
      bits[e.finger - 1] = 1;
    }
  }
  return bits;
}

void write_events_csv(std::ostream &out, std::vector<PressEvent> const &events)
{
  out << "finger,onset_s,release_s\n";
  for (auto const &e : events)
  {
    out << e.finger << ',' << format_double(e.onset) << ',' << format_double(e.release) << '\n';
  }
}

std::vector<PressEvent> read_events_csv(std::istream &in)
{
  std::string line;
  if (!read_line(in, line) || line != "finger,onset_s,release_s")
  {
    throw Error("parse", "events file: header must be 'finger,onset_s,release_s'");
  }
  std::vector<PressEvent> events;
  std::size_t             row = 1;
  while (read_line(in, line))
  {
    ++row;
    if (line.empty())
    {
      continue;
    }
    auto const f = split_fields(line);
    if (f.size() != 3)
    {
      throw Error("parse", "events file row " + std::to_string(row) + ": expected 3 fields");
    }
    std::string const what = "events file row " + std::to_string(row);
    events.push_back({parse_size(f[0], what), parse_double(f[1], what), parse_double(f[2], what)});
  }
  return events;
}

}  // namespace finemotion::data

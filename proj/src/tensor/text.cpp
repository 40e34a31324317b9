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

#include "finemotion/text.hpp"

#include "finemotion/error.hpp"

#include <charconv>
#include <istream>

namespace finemotion {

std::string format_double(double value)
{
  char       buf[64];
  auto const r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view text, std::string_view what)
{
  double     value = 0.0;
  auto const r     = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || text.empty())
  {
    throw Error("parse", std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

std::size_t parse_size(std::string_view text, std::string_view what)
{
  std::size_t value = 0;
  auto const  r     = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || text.empty())
  {
    throw Error("parse", std::string(what) + ": '" + std::string(text) + "' is not a non-negative integer");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter)
{
  std::vector<std::string_view> fields;
  std::size_t                   start = 0;
  while (true)
  {
    auto const end = line.find(delimiter, start);
    if (end == std::string_view::npos)
    {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

bool read_line(std::istream &in, std::string &line)
{
  if (!std::getline(in, line))
  {
    return false;
  }
  if (!line.empty() && line.back() == '\r')
  {
    line.pop_back();
  }
  return true;
}

}  // namespace finemotion

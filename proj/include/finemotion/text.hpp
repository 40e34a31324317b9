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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace finemotion {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Parses a whole field as a double; `what` names it in the error.
double      parse_double(std::string_view text, std::string_view what);
std::size_t parse_size(std::string_view text, std::string_view what);

/// Splits one delimited line; no quoting.
std::vector<std::string_view> split_fields(std::string_view line, char delimiter = ',');

/// Reads the next line without its terminator ('\r' stripped); false at end.
bool read_line(std::istream &in, std::string &line);

}  // namespace finemotion

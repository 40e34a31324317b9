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

#include <stdexcept>
#include <string>

namespace finemotion {

/// Raised for every contract violation in the library. The message is a single
/// line prefixed by a short machine-readable code, e.g. "shape: conv2d ...".
class Error : public std::runtime_error
{
public:
  Error(std::string code, std::string const &message)
    : std::runtime_error(code + ": " + message)
    , code_(std::move(code))
  {}

  std::string const &code() const noexcept
  {
    return code_;
  }

private:
  std::string code_;
};

}  // namespace finemotion

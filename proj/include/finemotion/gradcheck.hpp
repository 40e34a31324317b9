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
#include <functional>
#include <span>
#include <vector>

namespace finemotion {

using ScalarObjective = std::function<double(std::span<double const>)>;

/// Compares an analytic gradient with central differences of `objective` at
/// `point`. Returns max |analytic - numeric| / max(1, |analytic|) over the
/// checked coordinates (all of them when `coordinates` is empty).
double finite_diff_check(ScalarObjective const &objective, std::span<double const> point,
                         std::span<double const> analytic, double step = 1e-3,
                         std::span<std::size_t const> coordinates = {});

}  // namespace finemotion

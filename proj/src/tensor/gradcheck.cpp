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

#include "finemotion/gradcheck.hpp"

#include "finemotion/error.hpp"

#include <algorithm>
#include <cmath>

namespace finemotion {

double finite_diff_check(ScalarObjective const &objective, std::span<double const> point,
                         std::span<double const> analytic, double step,
                         std::span<std::size_t const> coordinates)
{
  if (point.size() != analytic.size())
  {
    throw Error("shape", "finite_diff_check: point and gradient lengths differ");
  }
  std::vector<double> probe(point.begin(), point.end());
  double              worst = 0.0;
  auto check_one = [&](std::size_t i) {
    double const saved = probe[i];
    probe[i]           = saved + step;
    double const up    = objective(probe);
    probe[i]           = saved - step;
    double const down  = objective(probe);
    probe[i]           = saved;
    double const numeric = (up - down) / (2.0 * step);
    double const err     = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    worst                = std::max(worst, err);
  };
  if (coordinates.empty())
  {
    for (std::size_t i = 0; i < probe.size(); ++i)
    {
      check_one(i);
    }
  }
  else
  {
    for (auto i : coordinates)
    {
      check_one(i);
    }
  }
  return worst;
}

}  // namespace finemotion

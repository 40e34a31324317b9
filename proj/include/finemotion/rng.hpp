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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace finemotion {

/// All stochastic code draws from this engine; the helpers below avoid the
/// implementation-defined std:: distributions so streams are portable.
using Rng = std::mt19937_64;

inline double uniform01(Rng &rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng &rng, double lo, double hi)
{
  return lo + (hi - lo) * uniform01(rng);
}

/// Integer in [0, n).
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n)
{
  // rejection sampling keeps the draw unbiased
  std::uint64_t const limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t       r     = rng();
  while (r >= limit)
  {
    r = rng();
  }
  return r % n;
}

inline double standard_normal(Rng &rng)
{
  double u1 = uniform01(rng);
  while (u1 <= 0.0)
  {
    u1 = uniform01(rng);
  }
  double const u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Derives an independent seed from a base seed and a stream tag (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag)
{
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z               = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z               = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename Container>
void shuffle(Container &items, Rng &rng)
{
  for (std::size_t i = items.size(); i > 1; --i)
  {
    std::size_t const j = uniform_index(rng, i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace finemotion

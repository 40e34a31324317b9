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
#include "finemotion/synthlab.hpp"

#include <algorithm>
#include <cmath>

namespace finemotion::synth {
namespace {

constexpr std::array<double, kBands> kCentres{0.15, 0.32, 0.5, 0.68, 0.85};

// per-channel response at full group excursion: centre shift, half-thickness
// (fractions of height), intensity, tilt, lateral gradient, taper
constexpr std::array<double, kBandChannels> kChannelScale{0.025, 0.02, 0.3, 0.03, 0.2, 0.015};

// typical group excursion in radians (sum of the group's flexion at a full
// piano press, or twice the wrist drift amplitude per joint)
constexpr std::array<double, kBands> kGroupExcursion{1.4, 2.8, 2.8, 2.8, 0.9};

}  // namespace

std::vector<std::size_t> band_joints(std::size_t band)
{
  switch (band)
  {
  case 0:
    return {kin::kThumbMp, kin::kThumbIp};
  case 1:
  case 2:
  {
    std::size_t const ray = band;
    return {kin::finger_joint(ray, 1), kin::finger_joint(ray, 2), kin::finger_joint(ray, 3)};
  }
  case 3:
    return {kin::finger_joint(3, 1), kin::finger_joint(3, 2), kin::finger_joint(3, 3),
            kin::finger_joint(4, 1), kin::finger_joint(4, 2), kin::finger_joint(4, 3)};
  case 4:
    return {kin::kWristRoll, kin::kWristPitch, kin::kWristYaw};
  default:
    throw Error("range", "band index " + std::to_string(band) + " out of range");
  }
}

Phenotype make_phenotype(std::uint64_t seed, double sigma, LabConstants const &lab)
{
  if (!(sigma >= 0.0))
  {
    throw Error("range", "noise scale must be non-negative");
  }
  Rng       rng(seed);
  Phenotype ph;
  ph.seed       = seed;
  ph.sigma      = sigma;
  ph.brightness = uniform(rng, 0.08, 0.14);
  ph.rest       = rest_configuration(lab);
  for (std::size_t b = 0; b < kBands; ++b)
  {
    Band &band     = ph.bands[b];
    band.centre    = kCentres[b] + uniform(rng, -0.01, 0.01);
    band.half      = uniform(rng, 0.035, 0.045);
    band.intensity = uniform(rng, 0.35, 0.45);
    std::size_t const joints = band_joints(b).size();
    band.gain.resize(joints);
    for (auto &g : band.gain)
    {
      for (std::size_t c = 0; c < kBandChannels; ++c)
      {
        g[c] = kChannelScale[c] / kGroupExcursion[b] * uniform(rng, 0.5, 1.5);
      }
    }
  }
  return ph;
}

std::vector<double> render_frame(kin::Configuration const &x, Phenotype const &ph, std::size_t side, Rng &rng)
{
  if (side < 32)
  {
    throw Error("range", "rendered images need side >= 32");
  }
  auto const          n = static_cast<double>(side);
  std::vector<double> img(side * side, ph.brightness);
  for (std::size_t b = 0; b < kBands; ++b)
  {
    Band const                      &band   = ph.bands[b];
    auto const                       joints = band_joints(b);
    std::array<double, kBandChannels> ch{};
    for (std::size_t j = 0; j < joints.size(); ++j)
    {
      double const flex = ph.rest[joints[j]] - x[joints[j]];
      for (std::size_t c = 0; c < kBandChannels; ++c)
      {
        ch[c] += band.gain[j][c] * flex;
      }
    }
    for (std::size_t col = 0; col < side; ++col)
    {
      double const lateral   = (static_cast<double>(col) + 0.5) / n - 0.5;
      double const centre    = n * (band.centre + ch[0] + ch[3] * lateral);
      double const half      = n * std::max(0.005, band.half + ch[1] + ch[5] * lateral);
      double const intensity = band.intensity + ch[2] + ch[4] * lateral;
      // anti-aliased coverage of each pixel row by [centre - half, centre + half]
      auto const first = static_cast<long>(std::floor(centre - half));
      auto const last  = static_cast<long>(std::ceil(centre + half));
      for (long row = std::max(0L, first); row < std::min<long>(static_cast<long>(side), last + 1); ++row)
      {
        double const lo = std::max(static_cast<double>(row), centre - half);
        double const hi = std::min(static_cast<double>(row + 1), centre + half);
        if (hi > lo)
        {
          img[static_cast<std::size_t>(row) * side + col] += intensity * (hi - lo);
        }
      }
    }
  }
  for (auto &v : img)
  {
    if (ph.sigma > 0.0)
    {
      double const speckle = std::exp(ph.sigma * standard_normal(rng));
      v                    = v * speckle + 0.5 * ph.sigma * standard_normal(rng);
    }
    v = std::clamp(v, 0.0, 1.0);
  }
  return img;
}

data::GrayImage to_gray(std::vector<double> const &values, std::size_t side)
{
  if (values.size() != side * side)
  {
    throw Error("shape", "image has " + std::to_string(values.size()) + " values, expected side^2");
  }
  data::GrayImage img{side, side, std::vector<std::uint8_t>(values.size())};
  std::transform(values.begin(), values.end(), img.pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  return img;
}

}  // namespace finemotion::synth

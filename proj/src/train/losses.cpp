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

#include "finemotion/losses.hpp"

#include "finemotion/error.hpp"

#include <algorithm>
#include <cmath>

namespace finemotion::train {
namespace {

void require_same(Tensor const &a, Tensor const &b, char const *what)
{
  if (a.shape() != b.shape() || a.empty())
  {
    throw Error("shape", std::string(what) + ": prediction " + a.shape_string() + " vs target " +
                             b.shape_string());
  }
}

std::size_t row_count(Tensor const &t)
{
  return t.rank() <= 1 ? 1 : t.size() / t.shape().back();
}

}  // namespace

double loss_bce(Tensor const &probabilities, Tensor const &labels)
{
  require_same(probabilities, labels, "loss_bce");
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i)
  {
    double const q = std::clamp(probabilities[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    double const p = labels[i];
    sum -= p * std::log(q) + (1.0 - p) * std::log1p(-q);
  }
  return sum / static_cast<double>(probabilities.size());
}

Tensor loss_bce_gradient(Tensor const &probabilities, Tensor const &labels)
{
  require_same(probabilities, labels, "loss_bce");
  Tensor       grad(probabilities.shape());
  double const scale = 1.0 / static_cast<double>(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i)
  {
    double const q = probabilities[i];
    if (q <= kProbabilityClamp || q >= 1.0 - kProbabilityClamp)
    {
      continue;
    }
    double const p = labels[i];
    grad[i]        = scale * (-p / q + (1.0 - p) / (1.0 - q));
  }
  return grad;
}

double loss_mse(Tensor const &predicted, Tensor const &target)
{
  require_same(predicted, target, "loss_mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
  {
    double const d = predicted[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(row_count(predicted));
}

Tensor loss_mse_gradient(Tensor const &predicted, Tensor const &target)
{
  require_same(predicted, target, "loss_mse");
  Tensor       grad(predicted.shape());
  double const scale = 2.0 / static_cast<double>(row_count(predicted));
  for (std::size_t i = 0; i < predicted.size(); ++i)
  {
    grad[i] = scale * (predicted[i] - target[i]);
  }
  return grad;
}

double combined_loss(double lambda, double mse, double bce)
{
  return lambda * mse + bce;
}

}  // namespace finemotion::train

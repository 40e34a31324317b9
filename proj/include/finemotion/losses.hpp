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

#include "finemotion/tensor.hpp"

namespace finemotion::train {

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross entropy over every entry; probabilities are clamped to
/// [eps, 1 - eps] first.
double loss_bce(Tensor const &probabilities, Tensor const &labels);

/// Gradient of loss_bce with respect to the probabilities. Entries held at
/// the clamp get a zero gradient.
Tensor loss_bce_gradient(Tensor const &probabilities, Tensor const &labels);

/// Mean over rows of the squared Euclidean row difference.
double loss_mse(Tensor const &predicted, Tensor const &target);
Tensor loss_mse_gradient(Tensor const &predicted, Tensor const &target);

double combined_loss(double lambda, double mse, double bce);

}  // namespace finemotion::train

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

#include "finemotion/rng.hpp"
#include "finemotion/tensor.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace finemotion::ops {

enum class Activation
{
  kNone,
  kRelu,
  kSigmoid,
  kTanh
};

std::string_view activation_name(Activation act);
/// Accepts "none", "linear", "relu", "sigmoid", "tanh".
Activation parse_activation(std::string_view name);

double sigmoid(double x) noexcept;

/// Gradients of one operator application: one tensor per input and one per
/// parameter, each shaped like the tensor it differentiates.
struct OpGradient
{
  std::vector<Tensor> inputs;
  std::vector<Tensor> params;
};

enum class Mode
{
  kTrain,
  kInfer
};

// ---------------------------------------------------------------------------
// conv2d: 3x3 kernel, stride 1, zero padding 1. Input H x W x Cin, weights
// 3 x 3 x Cin x Cout, bias Cout.

std::size_t conv2d_param_count(std::size_t in_channels, std::size_t out_channels);

Tensor conv2d(Tensor const &input, Tensor const &weights, Tensor const &bias, Activation act);

/// Accumulates weight and bias gradients (+=). grad_input is overwritten when
/// non-null. `output` is the post-activation forward result.
void conv2d_backward(Tensor const &input, Tensor const &weights, Tensor const &output,
                     Tensor const &grad_output, Activation act, Tensor *grad_input,
                     Tensor &grad_weights, Tensor &grad_bias);

OpGradient conv2d_gradient(Tensor const &input, Tensor const &weights, Tensor const &bias,
                           Activation act, Tensor const &grad_output);

// ---------------------------------------------------------------------------
// maxpool2d: valid pooling with stride equal to the window.

struct PoolResult
{
  Tensor                   output;
  std::vector<std::size_t> argmax;  // flat input index feeding each output
};

PoolResult maxpool2d(Tensor const &input, std::size_t window);
Tensor     maxpool2d_backward(Shape const &input_shape, std::span<std::size_t const> argmax,
                              Tensor const &grad_output);

// ---------------------------------------------------------------------------
// dense: input d_in (or N x d_in), weights d_in x d_out, bias d_out.

std::size_t dense_param_count(std::size_t in_width, std::size_t out_width);

Tensor dense(Tensor const &input, Tensor const &weights, Tensor const &bias, Activation act);

void dense_backward(Tensor const &input, Tensor const &weights, Tensor const &output,
                    Tensor const &grad_output, Activation act, Tensor *grad_input,
                    Tensor &grad_weights, Tensor &grad_bias);

OpGradient dense_gradient(Tensor const &input, Tensor const &weights, Tensor const &bias,
                          Activation act, Tensor const &grad_output);

// ---------------------------------------------------------------------------
// Inverted dropout. `mask`, when given, receives the per-value multiplier
// (0 or 1/(1-rate)) so the backward pass is grad * mask.

Tensor dropout(Tensor const &input, double rate, Mode mode, Rng &rng, Tensor *mask = nullptr);

// ---------------------------------------------------------------------------
// GRU, reset-after ("double bias") convention. Gate blocks are ordered
// [update z | reset r | candidate n] along the 3h axis:
//
//   z = sigmoid(x Wz + bz + h Uz + cz)
//   r = sigmoid(x Wr + br + h Ur + cr)
//   n = act(x Wn + bn + r * (h Un + cn))
//   h' = z * h + (1 - z) * n
//
// The initial hidden state is zero.

std::size_t gru_param_count(std::size_t in_width, std::size_t hidden);

struct GruWeights
{
  Tensor const &kernel;          // d_in x 3h
  Tensor const &recurrent;       // h x 3h
  Tensor const &input_bias;      // 3h
  Tensor const &recurrent_bias;  // 3h
};

struct GruGradients
{
  Tensor &kernel;
  Tensor &recurrent;
  Tensor &input_bias;
  Tensor &recurrent_bias;
};

struct GruCache
{
  std::vector<double> hidden;    // (k+1) x h, row 0 is the zero initial state
  std::vector<double> update;    // k x h
  std::vector<double> reset;     // k x h
  std::vector<double> cand_pre;  // k x h, candidate pre-activation
  std::vector<double> cand;      // k x h
  std::vector<double> rec_cand;  // k x h, h Un + cn
};

/// Returns the k x h hidden-state sequence.
Tensor gru_forward(Tensor const &sequence, GruWeights const &weights, Activation candidate,
                   GruCache *cache = nullptr);

/// Backpropagation through time. Parameter gradients accumulate (+=);
/// grad_sequence is overwritten when non-null.
void gru_backward(Tensor const &sequence, GruWeights const &weights, Activation candidate,
                  GruCache const &cache, Tensor const &grad_hidden, Tensor *grad_sequence,
                  GruGradients grads);

OpGradient gru_gradient(Tensor const &sequence, GruWeights const &weights, Activation candidate,
                        Tensor const &grad_hidden);

}  // namespace finemotion::ops

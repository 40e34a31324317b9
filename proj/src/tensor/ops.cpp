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

#include "finemotion/ops.hpp"

#include "finemotion/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace finemotion::ops {
namespace {

using RowMat    = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap    = Eigen::Map<RowMat>;
using ConstMat  = Eigen::Map<RowMat const>;
using RowVec    = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using VecMap    = Eigen::Map<RowVec>;
using ConstVec  = Eigen::Map<RowVec const>;

double activate(Activation act, double x) noexcept
{
  switch (act)
  {
  case Activation::kRelu:
    return x > 0.0 ? x : 0.0;
  case Activation::kSigmoid:
    return sigmoid(x);
  case Activation::kTanh:
    return std::tanh(x);
  case Activation::kNone:
    break;
  }
  return x;
}

// Derivative expressed through the activation's output.
double activation_slope(Activation act, double y) noexcept
{
  switch (act)
  {
  case Activation::kRelu:
    return y > 0.0 ? 1.0 : 0.0;
  case Activation::kSigmoid:
    return y * (1.0 - y);
  case Activation::kTanh:
    return 1.0 - y * y;
  case Activation::kNone:
    break;
  }
  return 1.0;
}

void apply_activation(Activation act, std::span<double> values) noexcept
{
  if (act == Activation::kNone)
  {
    return;
  }
  for (auto &v : values)
  {
    v = activate(act, v);
  }
}

void require(bool ok, std::string const &message)
{
  if (!ok)
  {
    throw Error("shape", message);
  }
}

AlignedVector &scratch(int slot)
{
  thread_local AlignedVector buffers[3];
  return buffers[slot];
}

void im2col(Tensor const &input, AlignedVector &col)
{
  std::size_t const height = input.dim(0);
  std::size_t const width  = input.dim(1);
  std::size_t const chans  = input.dim(2);
  std::size_t const row    = 9 * chans;
  col.assign(height * width * row, 0.0);
  double const *src = input.data();
  for (std::size_t h = 0; h < height; ++h)
  {
    for (std::size_t w = 0; w < width; ++w)
    {
      double *dst = col.data() + (h * width + w) * row;
      for (std::size_t kh = 0; kh < 3; ++kh)
      {
        std::ptrdiff_t const sh = static_cast<std::ptrdiff_t>(h + kh) - 1;
        if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(height))
        {
          continue;
        }
        for (std::size_t kw = 0; kw < 3; ++kw)
        {
          std::ptrdiff_t const sw = static_cast<std::ptrdiff_t>(w + kw) - 1;
          if (sw < 0 || sw >= static_cast<std::ptrdiff_t>(width))
          {
            continue;
          }
          std::copy_n(src + (static_cast<std::size_t>(sh) * width + static_cast<std::size_t>(sw)) * chans,
                      chans, dst + (kh * 3 + kw) * chans);
        }
      }
    }
  }
}

void col2im(AlignedVector const &col, Tensor &grad_input)
{
  std::size_t const height = grad_input.dim(0);
  std::size_t const width  = grad_input.dim(1);
  std::size_t const chans  = grad_input.dim(2);
  std::size_t const row    = 9 * chans;
  grad_input.fill(0.0);
  double *dst = grad_input.data();
  for (std::size_t h = 0; h < height; ++h)
  {
    for (std::size_t w = 0; w < width; ++w)
    {
      double const *src = col.data() + (h * width + w) * row;
      for (std::size_t kh = 0; kh < 3; ++kh)
      {
        std::ptrdiff_t const sh = static_cast<std::ptrdiff_t>(h + kh) - 1;
        if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(height))
        {
          continue;
        }
        for (std::size_t kw = 0; kw < 3; ++kw)
        {
          std::ptrdiff_t const sw = static_cast<std::ptrdiff_t>(w + kw) - 1;
          if (sw < 0 || sw >= static_cast<std::ptrdiff_t>(width))
          {
            continue;
          }
          double       *d = dst + (static_cast<std::size_t>(sh) * width + static_cast<std::size_t>(sw)) * chans;
          double const *s = src + (kh * 3 + kw) * chans;
          for (std::size_t c = 0; c < chans; ++c)
          {
            d[c] += s[c];
          }
        }
      }
    }
  }
}

void check_conv_shapes(Tensor const &input, Tensor const &weights, Tensor const &bias)
{
  require(input.rank() == 3, "conv2d input must be HxWxC, got " + input.shape_string());
  require(weights.rank() == 4 && weights.dim(0) == 3 && weights.dim(1) == 3,
          "conv2d weights must be 3x3xCinxCout, got " + weights.shape_string());
  require(weights.dim(2) == input.dim(2), "conv2d channel mismatch: input " + input.shape_string() +
                                              " vs weights " + weights.shape_string());
  require(bias.rank() == 1 && bias.dim(0) == weights.dim(3),
          "conv2d bias " + bias.shape_string() + " does not match weights " + weights.shape_string());
}

std::pair<std::size_t, std::size_t> dense_rows(Tensor const &input, Tensor const &weights,
                                               Tensor const &bias)
{
  require(weights.rank() == 2, "dense weights must be d_in x d_out, got " + weights.shape_string());
  require(bias.rank() == 1 && bias.dim(0) == weights.dim(1),
          "dense bias " + bias.shape_string() + " does not match weights " + weights.shape_string());
  require(input.rank() == 1 || input.rank() == 2, "dense input must be d_in or N x d_in, got " +
                                                      input.shape_string());
  std::size_t const in_width = input.shape().back();
  require(in_width == weights.dim(0), "dense shape mismatch: input " + input.shape_string() +
                                          " vs weights " + weights.shape_string());
  std::size_t const rows = input.rank() == 1 ? 1 : input.dim(0);
  return {rows, in_width};
}

}  // namespace

std::string_view activation_name(Activation act)
{
  switch (act)
  {
  case Activation::kRelu:
    return "relu";
  case Activation::kSigmoid:
    return "sigmoid";
  case Activation::kTanh:
    return "tanh";
  case Activation::kNone:
    break;
  }
  return "linear";
}

Activation parse_activation(std::string_view name)
{
  if (name == "relu")
  {
    return Activation::kRelu;
  }
  if (name == "sigmoid")
  {
    return Activation::kSigmoid;
  }
  if (name == "tanh")
  {
    return Activation::kTanh;
  }
  if (name == "none" || name == "linear")
  {
    return Activation::kNone;
  }
  throw Error("parse", "unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) noexcept
{
  if (x >= 0.0)
  {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double const e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------

std::size_t conv2d_param_count(std::size_t in_channels, std::size_t out_channels)
{
  return 9 * in_channels * out_channels + out_channels;
}

Tensor conv2d(Tensor const &input, Tensor const &weights, Tensor const &bias, Activation act)
{
  check_conv_shapes(input, weights, bias);
  std::size_t const pixels = input.dim(0) * input.dim(1);
  std::size_t const cin    = input.dim(2);
  std::size_t const cout   = weights.dim(3);

  auto &col = scratch(0);
  im2col(input, col);

  Tensor   output({input.dim(0), input.dim(1), cout});
  MatMap   out(output.data(), static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(cout));
  ConstMat cols(col.data(), static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(9 * cin));
  ConstMat kernel(weights.data(), static_cast<Eigen::Index>(9 * cin), static_cast<Eigen::Index>(cout));
  out.noalias() = cols * kernel;
  out.rowwise() += ConstVec(bias.data(), static_cast<Eigen::Index>(cout));
  apply_activation(act, output.values());
  return output;
}

void conv2d_backward(Tensor const &input, Tensor const &weights, Tensor const &output,
                     Tensor const &grad_output, Activation act, Tensor *grad_input,
                     Tensor &grad_weights, Tensor &grad_bias)
{
  check_conv_shapes(input, weights, grad_bias);
  require(grad_output.shape() == output.shape(), "conv2d gradient " + grad_output.shape_string() +
                                                     " does not match output " + output.shape_string());
  require(grad_weights.shape() == weights.shape(), "conv2d weight gradient shape mismatch");
  auto const pixels = static_cast<Eigen::Index>(input.dim(0) * input.dim(1));
  auto const cin9   = static_cast<Eigen::Index>(9 * input.dim(2));
  auto const cout   = static_cast<Eigen::Index>(weights.dim(3));

  auto &pre = scratch(1);
  pre.resize(grad_output.size());
  for (std::size_t i = 0; i < pre.size(); ++i)
  {
    pre[i] = grad_output[i] * activation_slope(act, output[i]);
  }
  auto &col = scratch(0);
  im2col(input, col);

  ConstMat dpre(pre.data(), pixels, cout);
  ConstMat cols(col.data(), pixels, cin9);
  MatMap(grad_weights.data(), cin9, cout).noalias() += cols.transpose() * dpre;
  VecMap(grad_bias.data(), cout) += dpre.colwise().sum();

  if (grad_input != nullptr)
  {
    auto &dcol = scratch(2);
    dcol.resize(col.size());
    ConstMat kernel(weights.data(), cin9, cout);
    MatMap(dcol.data(), pixels, cin9).noalias() = dpre * kernel.transpose();
    if (grad_input->shape() != input.shape())
    {
      *grad_input = Tensor(input.shape());
    }
    col2im(dcol, *grad_input);
  }
}

OpGradient conv2d_gradient(Tensor const &input, Tensor const &weights, Tensor const &bias,
                           Activation act, Tensor const &grad_output)
{
  Tensor const output = conv2d(input, weights, bias, act);
  OpGradient   grads;
  grads.inputs.emplace_back(input.shape());
  grads.params.emplace_back(weights.shape());
  grads.params.emplace_back(bias.shape());
  conv2d_backward(input, weights, output, grad_output, act, &grads.inputs[0], grads.params[0],
                  grads.params[1]);
  return grads;
}

// ---------------------------------------------------------------------------

PoolResult maxpool2d(Tensor const &input, std::size_t window)
{
  require(input.rank() == 3, "maxpool2d input must be HxWxC, got " + input.shape_string());
  require(window >= 1, "maxpool2d window must be positive");
  std::size_t const height = input.dim(0);
  std::size_t const width  = input.dim(1);
  std::size_t const chans  = input.dim(2);
  if (window > height || window > width)
  {
    throw Error("shape", "maxpool2d window " + std::to_string(window) + " exceeds input " +
                             input.shape_string());
  }
  std::size_t const out_h = (height - window) / window + 1;
  std::size_t const out_w = (width - window) / window + 1;

  PoolResult result{Tensor({out_h, out_w, chans}), std::vector<std::size_t>(out_h * out_w * chans)};
  for (std::size_t oh = 0; oh < out_h; ++oh)
  {
    for (std::size_t ow = 0; ow < out_w; ++ow)
    {
      for (std::size_t c = 0; c < chans; ++c)
      {
        std::size_t best     = (oh * window * width + ow * window) * chans + c;
        double      best_val = input[best];
        for (std::size_t dh = 0; dh < window; ++dh)
        {
          for (std::size_t dw = 0; dw < window; ++dw)
          {
            std::size_t const idx = ((oh * window + dh) * width + ow * window + dw) * chans + c;
            // strict comparison keeps the first occurrence on ties
            if (input[idx] > best_val)
            {
              best_val = input[idx];
              best     = idx;
            }
          }
        }
        std::size_t const o = (oh * out_w + ow) * chans + c;
        result.output[o]    = best_val;
        result.argmax[o]    = best;
      }
    }
  }
  return result;
}

Tensor maxpool2d_backward(Shape const &input_shape, std::span<std::size_t const> argmax,
                          Tensor const &grad_output)
{
  require(grad_output.size() == argmax.size(), "maxpool2d gradient shape mismatch");
  Tensor grad_input(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o)
  {
    grad_input[argmax[o]] += grad_output[o];
  }
  return grad_input;
}

// ---------------------------------------------------------------------------

std::size_t dense_param_count(std::size_t in_width, std::size_t out_width)
{
  return in_width * out_width + out_width;
}

Tensor dense(Tensor const &input, Tensor const &weights, Tensor const &bias, Activation act)
{
  auto const [rows, in_width] = dense_rows(input, weights, bias);
  std::size_t const out_width = weights.dim(1);
  Shape             shape     = input.rank() == 1 ? Shape{out_width} : Shape{rows, out_width};
  Tensor            output(shape);
  MatMap            out(output.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(out_width));
  out.noalias() = ConstMat(input.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(in_width)) *
                  ConstMat(weights.data(), static_cast<Eigen::Index>(in_width),
                           static_cast<Eigen::Index>(out_width));
  out.rowwise() += ConstVec(bias.data(), static_cast<Eigen::Index>(out_width));
  apply_activation(act, output.values());
  return output;
}

void dense_backward(Tensor const &input, Tensor const &weights, Tensor const &output,
                    Tensor const &grad_output, Activation act, Tensor *grad_input,
                    Tensor &grad_weights, Tensor &grad_bias)
{
  auto const [rows, in_width] = dense_rows(input, weights, grad_bias);
  require(grad_output.shape() == output.shape(), "dense gradient shape mismatch");
  auto const r   = static_cast<Eigen::Index>(rows);
  auto const din = static_cast<Eigen::Index>(in_width);
  auto const dout = static_cast<Eigen::Index>(weights.dim(1));

  AlignedVector pre(grad_output.size());
  for (std::size_t i = 0; i < pre.size(); ++i)
  {
    pre[i] = grad_output[i] * activation_slope(act, output[i]);
  }
  ConstMat dpre(pre.data(), r, dout);
  ConstMat in(input.data(), r, din);
  MatMap(grad_weights.data(), din, dout).noalias() += in.transpose() * dpre;
  VecMap(grad_bias.data(), dout) += dpre.colwise().sum();
  if (grad_input != nullptr)
  {
    if (grad_input->shape() != input.shape())
    {
      *grad_input = Tensor(input.shape());
    }
    MatMap(grad_input->data(), r, din).noalias() =
        dpre * ConstMat(weights.data(), din, dout).transpose();
  }
}

OpGradient dense_gradient(Tensor const &input, Tensor const &weights, Tensor const &bias,
                          Activation act, Tensor const &grad_output)
{
  Tensor const output = dense(input, weights, bias, act);
  OpGradient   grads;
  grads.inputs.emplace_back(input.shape());
  grads.params.emplace_back(weights.shape());
  grads.params.emplace_back(bias.shape());
  dense_backward(input, weights, output, grad_output, act, &grads.inputs[0], grads.params[0],
                 grads.params[1]);
  return grads;
}

// ---------------------------------------------------------------------------

Tensor dropout(Tensor const &input, double rate, Mode mode, Rng &rng, Tensor *mask)
{
  if (!(rate >= 0.0 && rate < 1.0))
  {
    throw Error("range", "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::kInfer || rate == 0.0)
  {
    if (mask != nullptr)
    {
      *mask = Tensor(input.shape(), 1.0);
    }
    return input;
  }
  double const keep_scale = 1.0 / (1.0 - rate);
  Tensor       output(input.shape());
  Tensor       local_mask(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i)
  {
    double const m = uniform01(rng) < rate ? 0.0 : keep_scale;
    local_mask[i]  = m;
    output[i]      = input[i] * m;
  }
  if (mask != nullptr)
  {
    *mask = std::move(local_mask);
  }
  return output;
}

// ---------------------------------------------------------------------------

std::size_t gru_param_count(std::size_t in_width, std::size_t hidden)
{
  return 3 * ((in_width + hidden) * hidden + 2 * hidden);
}

namespace {

std::pair<std::size_t, std::size_t> check_gru(Tensor const &sequence, GruWeights const &w)
{
  require(sequence.rank() == 2, "gru input must be k x d_in, got " + sequence.shape_string());
  require(sequence.dim(0) >= 1, "gru sequence must be non-empty");
  require(w.recurrent.rank() == 2 && w.recurrent.dim(1) == 3 * w.recurrent.dim(0),
          "gru recurrent kernel must be h x 3h, got " + w.recurrent.shape_string());
  std::size_t const hidden = w.recurrent.dim(0);
  require(w.kernel.rank() == 2 && w.kernel.dim(0) == sequence.dim(1) && w.kernel.dim(1) == 3 * hidden,
          "gru kernel " + w.kernel.shape_string() + " does not match input " + sequence.shape_string());
  require(w.input_bias.size() == 3 * hidden && w.recurrent_bias.size() == 3 * hidden,
          "gru biases must have 3h entries");
  if (!sequence.all_finite())
  {
    throw Error("range", "gru input contains non-finite values");
  }
  return {sequence.dim(0), hidden};
}

}  // namespace

Tensor gru_forward(Tensor const &sequence, GruWeights const &weights, Activation candidate,
                   GruCache *cache)
{
  auto const [steps, hidden] = check_gru(sequence, weights);
  auto const k   = static_cast<Eigen::Index>(steps);
  auto const h   = static_cast<Eigen::Index>(hidden);
  auto const din = static_cast<Eigen::Index>(sequence.dim(1));

  RowMat projected = ConstMat(sequence.data(), k, din) * ConstMat(weights.kernel.data(), din, 3 * h);
  projected.rowwise() += ConstVec(weights.input_bias.data(), 3 * h);
  ConstMat recurrent(weights.recurrent.data(), h, 3 * h);
  ConstVec rec_bias(weights.recurrent_bias.data(), 3 * h);

  GruCache local;
  GruCache &c = cache != nullptr ? *cache : local;
  c.hidden.assign(static_cast<std::size_t>((k + 1) * h), 0.0);
  c.update.resize(static_cast<std::size_t>(k * h));
  c.reset.resize(c.update.size());
  c.cand_pre.resize(c.update.size());
  c.cand.resize(c.update.size());
  c.rec_cand.resize(c.update.size());

  RowVec rec(3 * h);
  for (Eigen::Index t = 0; t < k; ++t)
  {
    ConstVec prev(c.hidden.data() + t * h, h);
    rec.noalias() = prev * recurrent;
    rec += rec_bias;
    double *next = c.hidden.data() + (t + 1) * h;
    for (Eigen::Index j = 0; j < h; ++j)
    {
      std::size_t const o = static_cast<std::size_t>(t * h + j);
      double const      z = sigmoid(projected(t, j) + rec(j));
      double const      r = sigmoid(projected(t, h + j) + rec(h + j));
      double const      a = projected(t, 2 * h + j) + r * rec(2 * h + j);
      double const      n = activate(candidate, a);
      c.update[o]         = z;
      c.reset[o]          = r;
      c.rec_cand[o]       = rec(2 * h + j);
      c.cand_pre[o]       = a;
      c.cand[o]           = n;
      next[j]             = z * prev(j) + (1.0 - z) * n;
    }
  }
  return Tensor({steps, hidden}, std::vector<double>(c.hidden.begin() + h, c.hidden.end()));
}

void gru_backward(Tensor const &sequence, GruWeights const &weights, Activation candidate,
                  GruCache const &cache, Tensor const &grad_hidden, Tensor *grad_sequence,
                  GruGradients grads)
{
  auto const [steps, hidden] = check_gru(sequence, weights);
  require(grad_hidden.rank() == 2 && grad_hidden.dim(0) == steps && grad_hidden.dim(1) == hidden,
          "gru output gradient " + grad_hidden.shape_string() + " does not match k x h");
  auto const k   = static_cast<Eigen::Index>(steps);
  auto const h   = static_cast<Eigen::Index>(hidden);
  auto const din = static_cast<Eigen::Index>(sequence.dim(1));

  ConstMat recurrent(weights.recurrent.data(), h, 3 * h);
  RowMat   d_proj(k, 3 * h);  // gradient w.r.t. x W + b
  RowMat   d_rec(k, 3 * h);   // gradient w.r.t. h U + c
  RowVec   carry = RowVec::Zero(h);

  for (Eigen::Index t = k - 1; t >= 0; --t)
  {
    double const *prev = cache.hidden.data() + t * h;
    for (Eigen::Index j = 0; j < h; ++j)
    {
      std::size_t const o  = static_cast<std::size_t>(t * h + j);
      double const      dh = grad_hidden[o] + carry(j);
      double const      z  = cache.update[o];
      double const      r  = cache.reset[o];
      double const      n  = cache.cand[o];
      double const      dz = dh * (prev[j] - n);
      double const      dn = dh * (1.0 - z);
      carry(j)             = dh * z;
      double slope = 1.0;
      if (candidate == Activation::kRelu)
      {
        slope = cache.cand_pre[o] > 0.0 ? 1.0 : 0.0;
      }
      else if (candidate != Activation::kNone)
      {
        slope = activation_slope(candidate, n);
      }
      double const da_n = dn * slope;
      double const dr   = da_n * cache.rec_cand[o];
      double const da_z = dz * z * (1.0 - z);
      double const da_r = dr * r * (1.0 - r);
      d_proj(t, j)         = da_z;
      d_proj(t, h + j)     = da_r;
      d_proj(t, 2 * h + j) = da_n;
      d_rec(t, j)          = da_z;
      d_rec(t, h + j)      = da_r;
      d_rec(t, 2 * h + j)  = da_n * r;
    }
    carry.noalias() += d_rec.row(t) * recurrent.transpose();
  }

  ConstMat inputs(sequence.data(), k, din);
  ConstMat previous(cache.hidden.data(), k, h);
  MatMap(grads.kernel.data(), din, 3 * h).noalias() += inputs.transpose() * d_proj;
  MatMap(grads.recurrent.data(), h, 3 * h).noalias() += previous.transpose() * d_rec;
  VecMap(grads.input_bias.data(), 3 * h) += d_proj.colwise().sum();
  VecMap(grads.recurrent_bias.data(), 3 * h) += d_rec.colwise().sum();
  if (grad_sequence != nullptr)
  {
    if (grad_sequence->shape() != sequence.shape())
    {
      *grad_sequence = Tensor(sequence.shape());
    }
    MatMap(grad_sequence->data(), k, din).noalias() =
        d_proj * ConstMat(weights.kernel.data(), din, 3 * h).transpose();
  }
}

OpGradient gru_gradient(Tensor const &sequence, GruWeights const &weights, Activation candidate,
                        Tensor const &grad_hidden)
{
  GruCache cache;
  gru_forward(sequence, weights, candidate, &cache);
  OpGradient grads;
  grads.inputs.emplace_back(sequence.shape());
  grads.params.emplace_back(weights.kernel.shape());
  grads.params.emplace_back(weights.recurrent.shape());
  grads.params.emplace_back(weights.input_bias.shape());
  grads.params.emplace_back(weights.recurrent_bias.shape());
  gru_backward(sequence, weights, candidate, cache, grad_hidden, &grads.inputs[0],
               {grads.params[0], grads.params[1], grads.params[2], grads.params[3]});
  return grads;
}

}  // namespace finemotion::ops

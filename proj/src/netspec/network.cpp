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

#include "finemotion/network.hpp"

#include "finemotion/error.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace finemotion::net {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool is_frame_layer(LayerKind kind)
{
  return kind == LayerKind::kConv2d || kind == LayerKind::kMaxPool2d || kind == LayerKind::kDropout ||
         kind == LayerKind::kFlatten;
}

std::uint64_t name_tag(std::string_view name)
{
  std::uint64_t hash = 1469598103934665603ULL;
  for (char c : name)
  {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

Tensor uniform_tensor(Shape shape, double limit, std::uint64_t seed)
{
  Rng    rng(seed);
  Tensor t(std::move(shape));
  for (auto &v : t.values())
  {
    v = uniform(rng, -limit, limit);
  }
  return t;
}

void add_into(Tensor &dst, Tensor const &src)
{
  if (dst.empty())
  {
    dst = src;
    return;
  }
  for (std::size_t i = 0; i < dst.size(); ++i)
  {
    dst[i] += src[i];
  }
}

Tensor image_tensor(Image const &image, std::size_t side)
{
  if (image.size() != side * side)
  {
    throw Error("shape", "frame has " + std::to_string(image.size()) + " pixels, expected " +
                             std::to_string(side) + "x" + std::to_string(side));
  }
  return Tensor({side, side, 1}, image);
}

}  // namespace

Network::Network(ModelSpec spec, std::uint64_t seed)
  : spec_(std::move(spec))
{
  auto const shapes = infer_shapes(spec_);
  // parameters are created in layer order; each tensor draws from its own stream
  std::size_t channels = 1;
  std::size_t width    = 0;
  std::size_t i        = 0;
  auto        all      = spec_.encoder;
  all.insert(all.end(), spec_.decoder.begin(), spec_.decoder.end());
  for (auto const &layer : all)
  {
    Shape const &out = shapes[i++].output;
    if (layer.kind == LayerKind::kConv2d)
    {
      initialize_layer(layer, channels, seed, false);
    }
    else if (layer.kind == LayerKind::kGru || layer.kind == LayerKind::kDense)
    {
      initialize_layer(layer, width, seed, false);
    }
    if (out.size() == 3)
    {
      channels = out[2];
    }
    width = out.back();
  }
  bind_layers();
}

Network::Network(ModelSpec spec, ParamStore params)
  : spec_(std::move(spec))
{
  Network const reference(spec_, 0);
  auto const   &want = reference.params().entries();
  auto const   &have = params.entries();
  if (want.size() != have.size())
  {
    throw Error("param", "parameter set has " + std::to_string(have.size()) + " tensors, model needs " +
                             std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < want.size(); ++i)
  {
    if (want[i].name != have[i].name || want[i].value.shape() != have[i].value.shape())
    {
      throw Error("param", "parameter '" + have[i].name + "' " + have[i].value.shape_string() +
                               " does not match model entry '" + want[i].name + "' " +
                               want[i].value.shape_string());
    }
  }
  params_ = std::move(params);
  bind_layers();
}

void Network::initialize_layer(LayerSpec const &layer, std::size_t in_width, std::uint64_t seed, bool replace)
{
  auto put = [&](std::string const &suffix, Shape shape, double limit) {
    std::string const name = layer.name + "/" + suffix;
    Tensor value = limit > 0.0 ? uniform_tensor(std::move(shape), limit, derive_seed(seed, name_tag(name)))
                               : Tensor(std::move(shape));
    if (replace)
    {
      params_.get(name) = std::move(value);
    }
    else
    {
      params_.add(name, std::move(value));
    }
  };
  std::size_t const units = layer.units;
  switch (layer.kind)
  {
  case LayerKind::kConv2d: {
    double const fan_in = 9.0 * static_cast<double>(in_width);
    put("kernel", {3, 3, in_width, units}, std::sqrt(6.0 / fan_in));
    put("bias", {units}, 0.0);
    break;
  }
  case LayerKind::kDense: {
    double const fan_in = static_cast<double>(in_width);
    double const gain   = layer.activation == ops::Activation::kRelu ? 6.0 : 3.0;
    put("kernel", {in_width, units}, std::sqrt(gain / fan_in));
    put("bias", {units}, 0.0);
    break;
  }
  case LayerKind::kGru: {
    double const limit = 1.0 / std::sqrt(static_cast<double>(units));
    put("kernel", {in_width, 3 * units}, limit);
    put("recurrent_kernel", {units, 3 * units}, limit);
    put("input_bias", {3 * units}, 0.0);
    put("recurrent_bias", {3 * units}, 0.0);
    break;
  }
  default:
    break;
  }
}

void Network::bind_layers()
{
  frame_layers_.clear();
  sequence_layers_.clear();
  slots_.clear();
  frame_slots_.clear();
  in_widths_.clear();
  frame_in_channels_.clear();
  merge_inputs_.clear();

  auto const  shapes   = infer_shapes(spec_);
  std::size_t channels = 1;
  std::size_t width    = 0;
  std::size_t i        = 0;
  std::unordered_map<std::string, std::size_t> seq_index;

  auto bind = [&](LayerSpec const &layer, bool decoder) {
    Shape const &out = shapes[i++].output;
    if (!decoder && sequence_layers_.empty() && is_frame_layer(layer.kind))
    {
      frame_layers_.push_back(&layer);
      frame_in_channels_.push_back(channels);
      std::array<std::size_t, 2> s{kNone, kNone};
      if (layer.kind == LayerKind::kConv2d)
      {
        s = {param_slot(layer.name + "/kernel"), param_slot(layer.name + "/bias")};
      }
      frame_slots_.push_back(s);
      if (out.size() == 3)
      {
        channels = out[2];
      }
      width = out.back();
      return;
    }
    std::size_t const index = sequence_layers_.size();
    std::size_t const input = index == 0 ? kNone : index - 1;
    sequence_layers_.push_back(SequenceLayer{&layer, decoder, input});
    in_widths_.push_back(width);
    std::array<std::size_t, 4> s{kNone, kNone, kNone, kNone};
    if (layer.kind == LayerKind::kGru)
    {
      s = {param_slot(layer.name + "/kernel"), param_slot(layer.name + "/recurrent_kernel"),
           param_slot(layer.name + "/input_bias"), param_slot(layer.name + "/recurrent_bias")};
    }
    else if (layer.kind == LayerKind::kDense)
    {
      s[0] = param_slot(layer.name + "/kernel");
      s[1] = param_slot(layer.name + "/bias");
    }
    slots_.push_back(s);
    std::vector<std::size_t> merged;
    for (auto const &name : layer.inputs)
    {
      merged.push_back(seq_index.at(name));
    }
    merge_inputs_.push_back(std::move(merged));
    seq_index[layer.name] = index;
    width                 = out.back();
  };

  for (auto const &layer : spec_.encoder)
  {
    bind(layer, false);
  }
  encoder_end_ = sequence_layers_.size();
  for (auto const &layer : spec_.decoder)
  {
    bind(layer, true);
  }
  if (sequence_layers_.empty())
  {
    throw Error("geometry", "model has no sequence layers");
  }
  press_head_  = sequence_layers_.size() - 1;
  config_head_ = spec_.kind == ModelKind::kCBMF ? encoder_end_ - 1 : kNone;
}

void Network::initialize_decoder(std::uint64_t seed)
{
  for (std::size_t i = encoder_end_; i < sequence_layers_.size(); ++i)
  {
    initialize_layer(*sequence_layers_[i].spec, in_widths_[i], seed, true);
  }
}

std::vector<bool> Network::encoder_mask() const
{
  std::vector<bool> mask(params_.size(), true);
  for (std::size_t i = encoder_end_; i < sequence_layers_.size(); ++i)
  {
    for (auto slot : slots_[i])
    {
      if (slot != kNone)
      {
        mask[slot] = false;
      }
    }
  }
  return mask;
}

std::uint64_t Network::encoder_checksum() const
{
  return masked_checksum(true);
}

std::uint64_t Network::decoder_checksum() const
{
  return masked_checksum(false);
}

std::uint64_t Network::masked_checksum(bool encoder) const
{
  std::uint64_t hash = 1469598103934665603ULL;
  auto const    mask = encoder_mask();
  auto const   &entries = params_.entries();
  for (std::size_t i = 0; i < mask.size(); ++i)
  {
    if (mask[i] != encoder)
    {
      continue;
    }
    auto const *bytes = reinterpret_cast<unsigned char const *>(entries[i].value.data());
    for (std::size_t b = 0; b < entries[i].value.size() * sizeof(double); ++b)
    {
      hash ^= bytes[b];
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

std::vector<FrameLayerCache> Network::run_frame(Image const &image, ops::Mode mode, Rng &rng) const
{
  std::vector<FrameLayerCache> cache(frame_layers_.size());
  Tensor const                 input = image_tensor(image, spec_.image_side);
  Tensor const                *x     = &input;
  for (std::size_t j = 0; j < frame_layers_.size(); ++j)
  {
    LayerSpec const &layer = *frame_layers_[j];
    auto            &c     = cache[j];
    switch (layer.kind)
    {
    case LayerKind::kConv2d: {
      auto const &entries = params_.entries();
      c.output = ops::conv2d(*x, entries[frame_slots_[j][0]].value, entries[frame_slots_[j][1]].value,
                             layer.activation);
      break;
    }
    case LayerKind::kMaxPool2d: {
      auto pooled = ops::maxpool2d(*x, layer.window);
      c.output    = std::move(pooled.output);
      c.argmax    = std::move(pooled.argmax);
      break;
    }
    case LayerKind::kDropout:
      c.output = ops::dropout(*x, layer.rate, mode, rng, mode == ops::Mode::kTrain ? &c.mask : nullptr);
      break;
    case LayerKind::kFlatten:
      c.output = x->reshaped({x->size()});
      break;
    default:
      break;
    }
    x = &c.output;
  }
  return cache;
}

void Network::backprop_frame(Image const &image, std::vector<FrameLayerCache> const &cache,
                             Tensor grad, std::vector<Tensor> &param_grads) const
{
  Tensor const input = image_tensor(image, spec_.image_side);
  for (std::size_t jj = frame_layers_.size(); jj-- > 0;)
  {
    LayerSpec const &layer = *frame_layers_[jj];
    Tensor const    &in    = jj == 0 ? input : cache[jj - 1].output;
    switch (layer.kind)
    {
    case LayerKind::kConv2d: {
      auto const &entries = params_.entries();
      Tensor      grad_in;
      ops::conv2d_backward(in, entries[frame_slots_[jj][0]].value, cache[jj].output, grad, layer.activation,
                           jj == 0 ? nullptr : &grad_in, param_grads[frame_slots_[jj][0]],
                           param_grads[frame_slots_[jj][1]]);
      grad = std::move(grad_in);
      break;
    }
    case LayerKind::kMaxPool2d:
      grad = ops::maxpool2d_backward(in.shape(), cache[jj].argmax, grad);
      break;
    case LayerKind::kDropout:
      if (!cache[jj].mask.empty())
      {
        for (std::size_t i = 0; i < grad.size(); ++i)
        {
          grad[i] *= cache[jj].mask[i];
        }
      }
      break;
    case LayerKind::kFlatten:
      grad = grad.reshaped(in.shape());
      break;
    default:
      break;
    }
  }
}

ForwardPass Network::forward(std::span<FrameWindow const> batch, ops::Mode mode, Rng &rng, Heads heads) const
{
  ForwardPass pass;
  pass.mode  = mode;
  pass.heads = spec_.kind == ModelKind::kCBMF ? heads : Heads::kAll;

  std::unordered_map<Image const *, std::size_t> unique;
  for (auto const &window : batch)
  {
    if (window.size() != spec_.window)
    {
      throw Error("shape", "window has " + std::to_string(window.size()) + " frames, model expects k = " +
                               std::to_string(spec_.window));
    }
    std::vector<std::size_t> ids;
    for (Image const *frame : window)
    {
      auto [it, fresh] = unique.try_emplace(frame, pass.frames.size());
      if (fresh)
      {
        pass.frames.push_back(frame);
      }
      ids.push_back(it->second);
    }
    pass.window_frames.push_back(std::move(ids));
  }
  pass.frame_caches.reserve(pass.frames.size());
  for (Image const *frame : pass.frames)
  {
    pass.frame_caches.push_back(run_frame(*frame, mode, rng));
  }

  std::size_t const last = pass.heads == Heads::kEncoderOnly ? encoder_end_ : sequence_layers_.size();
  auto const       &entries = params_.entries();
  for (auto const &ids : pass.window_frames)
  {
    SequenceCache seq;
    std::size_t const feature_width = pass.frame_caches[ids[0]].back().output.size();
    seq.features                    = Tensor({spec_.window, feature_width});
    for (std::size_t t = 0; t < ids.size(); ++t)
    {
      auto const &f = pass.frame_caches[ids[t]].back().output;
      std::copy(f.values().begin(), f.values().end(), seq.features.data() + t * feature_width);
    }
    seq.outputs.resize(last);
    seq.grus.resize(last);
    for (std::size_t i = 0; i < last; ++i)
    {
      auto const   &layer = sequence_layers_[i];
      Tensor const &in    = layer.input == kNone ? seq.features : seq.outputs[layer.input];
      auto const   &s     = slots_[i];
      switch (layer.spec->kind)
      {
      case LayerKind::kConcatTime:
        seq.outputs[i] = in;
        break;
      case LayerKind::kGru:
        seq.outputs[i] = ops::gru_forward(in,
                                          {entries[s[0]].value, entries[s[1]].value, entries[s[2]].value,
                                           entries[s[3]].value},
                                          layer.spec->activation, &seq.grus[i]);
        break;
      case LayerKind::kDense:
        seq.outputs[i] = ops::dense(in, entries[s[0]].value, entries[s[1]].value, layer.spec->activation);
        break;
      case LayerKind::kMerge: {
        std::size_t total = 0;
        for (auto src : merge_inputs_[i])
        {
          total += seq.outputs[src].dim(1);
        }
        Tensor merged({spec_.window, total});
        std::size_t offset = 0;
        for (auto src : merge_inputs_[i])
        {
          Tensor const     &part = seq.outputs[src];
          std::size_t const w    = part.dim(1);
          for (std::size_t t = 0; t < spec_.window; ++t)
          {
            std::copy_n(part.data() + t * w, w, merged.data() + t * total + offset);
          }
          offset += w;
        }
        seq.outputs[i] = std::move(merged);
        break;
      }
      default:
        throw Error("geometry", "layer '" + layer.spec->name + "' cannot run in the sequence stage");
      }
    }

    Prediction pred;
    if (config_head_ != kNone)
    {
      pred.configurations = seq.outputs[config_head_];
    }
    if (last == sequence_layers_.size())
    {
      pred.presses = seq.outputs[press_head_];
      if (spec_.sigmoid_output)
      {
        for (auto &v : pred.presses.values())
        {
          v = ops::sigmoid(v);
        }
      }
    }
    pass.predictions.push_back(std::move(pred));
    pass.sequences.push_back(std::move(seq));
  }
  return pass;
}

void Network::backward(ForwardPass const &pass, std::span<HeadGradients const> grads,
                       std::vector<Tensor> &param_grads) const
{
  if (grads.size() != pass.sequences.size())
  {
    throw Error("shape", "backward got " + std::to_string(grads.size()) + " head gradients for " +
                             std::to_string(pass.sequences.size()) + " windows");
  }
  if (param_grads.size() != params_.size())
  {
    throw Error("shape", "parameter gradient set has the wrong length");
  }
  auto const         &entries = params_.entries();
  std::vector<Tensor> frame_grads(pass.frames.size());

  for (std::size_t w = 0; w < pass.sequences.size(); ++w)
  {
    SequenceCache const &seq  = pass.sequences[w];
    Prediction const    &pred = pass.predictions[w];
    std::size_t const    last = seq.outputs.size();
    std::vector<Tensor>  out_grads(last);
    Tensor               feature_grad;

    if (!grads[w].presses.empty() && last == sequence_layers_.size())
    {
      Tensor g = grads[w].presses;
      if (g.shape() != pred.presses.shape())
      {
        throw Error("shape", "press gradient " + g.shape_string() + " does not match " +
                                 pred.presses.shape_string());
      }
      if (spec_.sigmoid_output)
      {
        for (std::size_t i = 0; i < g.size(); ++i)
        {
          g[i] *= pred.presses[i] * (1.0 - pred.presses[i]);
        }
      }
      add_into(out_grads[press_head_], g);
    }
    if (!grads[w].configurations.empty())
    {
      if (config_head_ == kNone || grads[w].configurations.shape() != pred.configurations.shape())
      {
        throw Error("shape", "configuration gradient does not match the model's configuration head");
      }
      add_into(out_grads[config_head_], grads[w].configurations);
    }

    for (std::size_t i = last; i-- > 0;)
    {
      if (out_grads[i].empty())
      {
        continue;
      }
      auto const   &layer   = sequence_layers_[i];
      Tensor const &in      = layer.input == kNone ? seq.features : seq.outputs[layer.input];
      Tensor       &in_grad = layer.input == kNone ? feature_grad : out_grads[layer.input];
      auto const   &s       = slots_[i];
      switch (layer.spec->kind)
      {
      case LayerKind::kConcatTime:
        add_into(in_grad, out_grads[i]);
        break;
      case LayerKind::kGru: {
        Tensor g;
        ops::gru_backward(in,
                          {entries[s[0]].value, entries[s[1]].value, entries[s[2]].value, entries[s[3]].value},
                          layer.spec->activation, seq.grus[i], out_grads[i], &g,
                          {param_grads[s[0]], param_grads[s[1]], param_grads[s[2]], param_grads[s[3]]});
        add_into(in_grad, g);
        break;
      }
      case LayerKind::kDense: {
        Tensor g;
        ops::dense_backward(in, entries[s[0]].value, seq.outputs[i], out_grads[i], layer.spec->activation, &g,
                            param_grads[s[0]], param_grads[s[1]]);
        add_into(in_grad, g);
        break;
      }
      case LayerKind::kMerge: {
        std::size_t const total  = out_grads[i].dim(1);
        std::size_t       offset = 0;
        for (auto src : merge_inputs_[i])
        {
          std::size_t const width = seq.outputs[src].dim(1);
          Tensor            part({spec_.window, width});
          for (std::size_t t = 0; t < spec_.window; ++t)
          {
            std::copy_n(out_grads[i].data() + t * total + offset, width, part.data() + t * width);
          }
          add_into(out_grads[src], part);
          offset += width;
        }
        break;
      }
      default:
        break;
      }
    }

    if (feature_grad.empty())
    {
      continue;
    }
    std::size_t const feature_width = feature_grad.dim(1);
    auto const       &ids           = pass.window_frames[w];
    for (std::size_t t = 0; t < ids.size(); ++t)
    {
      Tensor row({feature_width},
                 std::vector<double>(feature_grad.data() + t * feature_width,
                                     feature_grad.data() + (t + 1) * feature_width));
      add_into(frame_grads[ids[t]], row);
    }
  }

  for (std::size_t f = 0; f < pass.frames.size(); ++f)
  {
    if (!frame_grads[f].empty())
    {
      backprop_frame(*pass.frames[f], pass.frame_caches[f], std::move(frame_grads[f]), param_grads);
    }
  }
}

Prediction Network::predict(FrameWindow frames) const
{
  Rng                      unused(0);
  FrameWindow const        windows[] = {frames};
  ForwardPass              pass      = forward(windows, ops::Mode::kInfer, unused);
  return std::move(pass.predictions.front());
}

}  // namespace finemotion::net

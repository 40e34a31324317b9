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

#include "finemotion/netspec.hpp"
#include "finemotion/ops.hpp"
#include "finemotion/param_store.hpp"
#include "finemotion/rng.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace finemotion::net {

/// Normalized grayscale frame, side x side values in [0, 1], row-major.
using Image = std::vector<double>;

/// One window of k frames. Frames are referenced, not copied; identical
/// pointers across the windows of a batch are run through the CNN once.
using FrameWindow = std::span<Image const *const>;

struct Prediction
{
  Tensor presses;         // k x 5 probabilities
  Tensor configurations;  // k x 17 normalized angles (CBMF only)
};

/// Loss gradients with respect to the model outputs: presses w.r.t. the
/// probabilities, configurations w.r.t. the predicted angles. Either may be
/// empty when that head carries no loss.
struct HeadGradients
{
  Tensor presses;
  Tensor configurations;
};

enum class Heads
{
  kAll,
  kEncoderOnly
};

struct FrameLayerCache
{
  Tensor                   output;
  Tensor                   mask;
  std::vector<std::size_t> argmax;
};

struct SequenceCache
{
  Tensor                     features;  // k x F stacked frame features
  std::vector<Tensor>        outputs;  // per sequence layer
  std::vector<ops::GruCache> grus;     // per sequence layer (used by gru layers)
};

/// Everything a backward pass needs from the matching forward pass.
struct ForwardPass
{
  ops::Mode                                 mode  = ops::Mode::kInfer;
  Heads                                     heads = Heads::kAll;
  std::vector<Image const *>                frames;
  std::vector<std::vector<FrameLayerCache>> frame_caches;
  std::vector<std::vector<std::size_t>>     window_frames;
  std::vector<SequenceCache>                sequences;
  std::vector<Prediction>                   predictions;
};

/// Executes a ModelSpec: owns the parameters and runs batched forward and
/// backward passes over the spec's layers.
class Network
{
public:
  Network(ModelSpec spec, std::uint64_t seed);
  Network(ModelSpec spec, ParamStore params);

  ModelSpec const &spec() const noexcept
  {
    return spec_;
  }
  ParamStore &params() noexcept
  {
    return params_;
  }
  ParamStore const &params() const noexcept
  {
    return params_;
  }

  /// Redraws every decoder parameter from `seed` (CBMF only).
  void initialize_decoder(std::uint64_t seed);

  /// Per parameter entry: true when it belongs to the encoder.
  std::vector<bool> encoder_mask() const;
  std::uint64_t     encoder_checksum() const;
  std::uint64_t     decoder_checksum() const;

  ForwardPass forward(std::span<FrameWindow const> batch, ops::Mode mode, Rng &rng,
                      Heads heads = Heads::kAll) const;

  /// Accumulates parameter gradients (+=) into `param_grads`, which must be
  /// shaped like params().zero_gradients().
  void backward(ForwardPass const &pass, std::span<HeadGradients const> grads,
                std::vector<Tensor> &param_grads) const;

  Prediction predict(FrameWindow frames) const;

private:
  struct SequenceLayer
  {
    LayerSpec const *spec;
    bool             decoder;
    std::size_t      input;  // index of the sequence layer feeding this one, or npos for frames
  };

  void          bind_layers();
  std::uint64_t masked_checksum(bool encoder) const;
  void        initialize_layer(LayerSpec const &layer, std::size_t in_width, std::uint64_t seed, bool replace);
  std::size_t param_slot(std::string const &name) const
  {
    return params_.index_of(name);
  }

  std::vector<FrameLayerCache> run_frame(Image const &image, ops::Mode mode, Rng &rng) const;
  void backprop_frame(Image const &image, std::vector<FrameLayerCache> const &cache,
                      Tensor grad_features, std::vector<Tensor> &param_grads) const;

  ModelSpec                              spec_;
  ParamStore                             params_;
  std::vector<LayerSpec const *>         frame_layers_;
  std::vector<SequenceLayer>             sequence_layers_;
  std::vector<std::array<std::size_t, 4>> slots_;  // param indices per sequence layer
  std::vector<std::array<std::size_t, 2>> frame_slots_;
  std::vector<std::size_t>               in_widths_;  // input width per sequence layer
  std::vector<std::size_t>               frame_in_channels_;
  std::vector<std::vector<std::size_t>>  merge_inputs_;  // per sequence layer
  std::size_t                            config_head_ = 0;
  std::size_t                            press_head_  = 0;
  std::size_t                            encoder_end_ = 0;  // sequence layers [0, encoder_end_) are encoder
};

}  // namespace finemotion::net

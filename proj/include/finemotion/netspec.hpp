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

#include "finemotion/ops.hpp"
#include "finemotion/tensor.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace finemotion::net {

enum class ModelKind
{
  kSF,
  kMF,
  kCBMF
};

std::string_view model_kind_name(ModelKind kind);
ModelKind        parse_model_kind(std::string_view name);

enum class LayerKind
{
  kConv2d,
  kMaxPool2d,
  kDropout,
  kFlatten,
  kConcatTime,
  kGru,
  kDense,
  kMerge
};

std::string_view layer_kind_name(LayerKind kind);
LayerKind        parse_layer_kind(std::string_view name);

/// One row of an architecture table. Only the fields meaningful for `kind`
/// are set: `units` for conv2d/gru/dense, `window` for pooling, `rate` for
/// dropout, `inputs` for merge.
struct LayerSpec
{
  std::string              name;
  LayerKind                kind       = LayerKind::kFlatten;
  std::size_t              units      = 0;
  std::size_t              window     = 0;
  double                   rate       = 0.0;
  ops::Activation          activation = ops::Activation::kNone;
  std::vector<std::string> inputs;

  friend bool operator==(LayerSpec const &, LayerSpec const &) = default;
};

/// The encoder holds the per-frame CNN (shared across the k frames) followed by
/// the sequence layers; the decoder, present only for CBMF, starts with the
/// merge of the configuration head and the residual features.
struct ModelSpec
{
  ModelKind              kind       = ModelKind::kMF;
  std::size_t            window     = 8;
  std::size_t            image_side = 224;
  double                 width      = 1.0;
  bool                   sigmoid_output = true;
  std::vector<LayerSpec> encoder;
  std::vector<LayerSpec> decoder;

  friend bool operator==(ModelSpec const &, ModelSpec const &) = default;
};

inline constexpr std::size_t kFingerCount      = 5;
inline constexpr std::size_t kConfigurationSize = 17;

/// Hidden widths scale with the width multiplier; output widths do not.
std::size_t scaled_width(std::size_t base, double width);

ModelSpec build_mf(std::size_t k = 8, std::size_t image_side = 224, double width = 1.0);
ModelSpec build_cbmf(std::size_t k = 8, std::size_t image_side = 224, double width = 1.0);
ModelSpec build_sf(std::size_t image_side = 224, double width = 1.0);
ModelSpec build_model(ModelKind kind, std::size_t k, std::size_t image_side, double width);

struct LayerShape
{
  std::string name;
  Shape       output;
  std::size_t params = 0;
  bool        decoder = false;
};

/// Walks the spec, validating geometry. Errors name the failing layer.
std::vector<LayerShape> infer_shapes(ModelSpec const &spec);

struct ParamReport
{
  std::vector<std::pair<std::string, std::size_t>> layers;
  std::size_t                                      total = 0;
};

ParamReport count_params(ModelSpec const &spec);

/// Table-style rounding: below 10,000 exact with thousands separators,
/// below 10^6 as "x.yyK", otherwise "x.yyM".
std::string format_count(std::size_t count);

std::string to_json(ModelSpec const &spec);
ModelSpec   model_spec_from_json(std::string_view text);

}  // namespace finemotion::net

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

#include "finemotion/netspec.hpp"

#include "finemotion/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace finemotion::net {
namespace {

using nlohmann::json;

LayerSpec conv(std::string name, std::size_t units)
{
  LayerSpec l;
  l.name       = std::move(name);
  l.kind       = LayerKind::kConv2d;
  l.units      = units;
  l.activation = ops::Activation::kRelu;
  return l;
}

LayerSpec pool(std::string name, std::size_t window)
{
  LayerSpec l;
  l.name   = std::move(name);
  l.kind   = LayerKind::kMaxPool2d;
  l.window = window;
  return l;
}

LayerSpec drop(std::string name, double rate)
{
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kDropout;
  l.rate = rate;
  return l;
}

LayerSpec simple(std::string name, LayerKind kind)
{
  LayerSpec l;
  l.name = std::move(name);
  l.kind = kind;
  return l;
}

LayerSpec gru(std::string name, std::size_t units, ops::Activation act)
{
  LayerSpec l;
  l.name       = std::move(name);
  l.kind       = LayerKind::kGru;
  l.units      = units;
  l.activation = act;
  return l;
}

LayerSpec dense(std::string name, std::size_t units, ops::Activation act)
{
  LayerSpec l = gru(std::move(name), units, act);
  l.kind      = LayerKind::kDense;
  return l;
}

// Side length after the four 2x2 poolings; the last pooling window is
// clipped to this extent.
std::size_t final_pool_window(std::size_t image_side)
{
  std::size_t extent = image_side;
  for (int i = 0; i < 4; ++i)
  {
    extent /= 2;
  }
  return std::clamp<std::size_t>(extent, 1, 4);
}

std::vector<LayerSpec> unet_encoder(std::size_t image_side, double width)
{
  std::vector<LayerSpec> layers;
  std::size_t const      base[] = {32, 64, 128, 256, 512};
  int                    conv_i = 0;
  for (std::size_t block = 0; block < 5; ++block)
  {
    std::size_t const ch = scaled_width(base[block], width);
    layers.push_back(conv("conv2d_" + std::to_string(++conv_i), ch));
    layers.push_back(conv("conv2d_" + std::to_string(++conv_i), ch));
    if (block >= 3)
    {
      layers.push_back(drop("dropout_" + std::to_string(block - 2), 0.3));
    }
    std::size_t const window = block < 4 ? 2 : final_pool_window(image_side);
    layers.push_back(pool("max_pooling2d_" + std::to_string(block + 1), window));
  }
  layers.push_back(simple("flatten", LayerKind::kFlatten));
  return layers;
}

std::size_t param_count(LayerSpec const &layer, std::size_t in_width)
{
  switch (layer.kind)
  {
  case LayerKind::kConv2d:
    return ops::conv2d_param_count(in_width, layer.units);
  case LayerKind::kGru:
    return ops::gru_param_count(in_width, layer.units);
  case LayerKind::kDense:
    return ops::dense_param_count(in_width, layer.units);
  default:
    return 0;
  }
}

[[noreturn]] void geometry_error(LayerSpec const &layer, std::string const &what)
{
  throw Error("geometry", "layer '" + layer.name + "' (" + std::string(layer_kind_name(layer.kind)) +
                              "): " + what);
}

}  // namespace

std::string_view model_kind_name(ModelKind kind)
{
  switch (kind)
  {
  case ModelKind::kSF:
    return "SF";
  case ModelKind::kMF:
    return "MF";
  case ModelKind::kCBMF:
    break;
  }
  return "CBMF";
}

ModelKind parse_model_kind(std::string_view name)
{
  if (name == "SF" || name == "sf")
  {
    return ModelKind::kSF;
  }
  if (name == "MF" || name == "mf")
  {
    return ModelKind::kMF;
  }
  if (name == "CBMF" || name == "cbmf")
  {
    return ModelKind::kCBMF;
  }
  throw Error("parse", "unknown model kind '" + std::string(name) + "'");
}

std::string_view layer_kind_name(LayerKind kind)
{
  switch (kind)
  {
  case LayerKind::kConv2d:
    return "conv2d";
  case LayerKind::kMaxPool2d:
    return "maxpool2d";
  case LayerKind::kDropout:
    return "dropout";
  case LayerKind::kFlatten:
    return "flatten";
  case LayerKind::kConcatTime:
    return "concat_time";
  case LayerKind::kGru:
    return "gru";
  case LayerKind::kDense:
    return "dense";
  case LayerKind::kMerge:
    break;
  }
  return "merge";
}

LayerKind parse_layer_kind(std::string_view name)
{
  for (auto kind : {LayerKind::kConv2d, LayerKind::kMaxPool2d, LayerKind::kDropout, LayerKind::kFlatten,
                    LayerKind::kConcatTime, LayerKind::kGru, LayerKind::kDense, LayerKind::kMerge})
  {
    if (layer_kind_name(kind) == name)
    {
      return kind;
    }
  }
  throw Error("parse", "unknown layer kind '" + std::string(name) + "'");
}

std::size_t scaled_width(std::size_t base, double width)
{
  if (!(width > 0.0))
  {
    throw Error("range", "width multiplier must be positive");
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(base) * width)));
}

ModelSpec build_mf(std::size_t k, std::size_t image_side, double width)
{
  ModelSpec spec;
  spec.kind       = ModelKind::kMF;
  spec.window     = k;
  spec.image_side = image_side;
  spec.width      = width;
  spec.encoder    = unet_encoder(image_side, width);
  spec.encoder.push_back(simple("concatenate", LayerKind::kConcatTime));
  spec.encoder.push_back(gru("gru_1", scaled_width(1024, width), ops::Activation::kRelu));
  spec.encoder.push_back(gru("gru_2", scaled_width(128, width), ops::Activation::kRelu));
  spec.encoder.push_back(gru("gru_3", kFingerCount, ops::Activation::kNone));
  infer_shapes(spec);
  return spec;
}

ModelSpec build_cbmf(std::size_t k, std::size_t image_side, double width)
{
  ModelSpec spec;
  spec.kind       = ModelKind::kCBMF;
  spec.window     = k;
  spec.image_side = image_side;
  spec.width      = width;
  spec.encoder    = unet_encoder(image_side, width);
  spec.encoder.push_back(simple("concatenate", LayerKind::kConcatTime));
  spec.encoder.push_back(gru("gru_1", scaled_width(1024, width), ops::Activation::kRelu));
  spec.encoder.push_back(gru("gru_2", scaled_width(128, width), ops::Activation::kRelu));
  spec.encoder.push_back(gru("gru_3", kConfigurationSize, ops::Activation::kNone));
  LayerSpec merge = simple("merge", LayerKind::kMerge);
  merge.inputs    = {"gru_3", "gru_2"};
  spec.decoder.push_back(merge);
  spec.decoder.push_back(gru("gru_4", scaled_width(256, width), ops::Activation::kRelu));
  spec.decoder.push_back(gru("gru_5", scaled_width(128, width), ops::Activation::kRelu));
  spec.decoder.push_back(gru("gru_6", kFingerCount, ops::Activation::kNone));
  infer_shapes(spec);
  return spec;
}

ModelSpec build_sf(std::size_t image_side, double width)
{
  ModelSpec spec;
  spec.kind           = ModelKind::kSF;
  spec.window         = 1;
  spec.image_side     = image_side;
  spec.width          = width;
  spec.sigmoid_output = false;
  spec.encoder        = unet_encoder(image_side, width);
  spec.encoder.push_back(dense("dense_1", scaled_width(1024, width), ops::Activation::kRelu));
  spec.encoder.push_back(dense("dense_2", scaled_width(128, width), ops::Activation::kRelu));
  spec.encoder.push_back(dense("dense_3", kFingerCount, ops::Activation::kSigmoid));
  infer_shapes(spec);
  return spec;
}

ModelSpec build_model(ModelKind kind, std::size_t k, std::size_t image_side, double width)
{
  switch (kind)
  {
  case ModelKind::kSF:
    return build_sf(image_side, width);
  case ModelKind::kMF:
    return build_mf(k, image_side, width);
  case ModelKind::kCBMF:
    break;
  }
  return build_cbmf(k, image_side, width);
}

std::vector<LayerShape> infer_shapes(ModelSpec const &spec)
{
  if (spec.kind == ModelKind::kSF && spec.window != 1)
  {
    throw Error("geometry", "SF model requires k = 1, got " + std::to_string(spec.window));
  }
  if (spec.window < 1)
  {
    throw Error("geometry", "window length k must be at least 1");
  }
  std::vector<LayerShape>             shapes;
  std::map<std::string, std::size_t> widths;  // sequence-stage output widths by layer
  Shape  frame{spec.image_side, spec.image_side, 1};
  bool   sequence_stage = false;
  Shape  current        = frame;

  auto visit = [&](LayerSpec const &layer, bool decoder) {
    std::size_t params = 0;
    switch (layer.kind)
    {
    case LayerKind::kConv2d:
      if (sequence_stage || current.size() != 3)
      {
        geometry_error(layer, "convolution needs an image-shaped input");
      }
      if (layer.units == 0)
      {
        geometry_error(layer, "zero output channels");
      }
      params  = param_count(layer, current[2]);
      current = {current[0], current[1], layer.units};
      break;
    case LayerKind::kMaxPool2d:
      if (sequence_stage || current.size() != 3)
      {
        geometry_error(layer, "pooling needs an image-shaped input");
      }
      if (layer.window == 0 || layer.window > current[0] || layer.window > current[1])
      {
        geometry_error(layer, "window " + std::to_string(layer.window) + " does not fit input " +
                                  shape_string(current));
      }
      current = {(current[0] - layer.window) / layer.window + 1,
                 (current[1] - layer.window) / layer.window + 1, current[2]};
      break;
    case LayerKind::kDropout:
      if (!(layer.rate >= 0.0 && layer.rate < 1.0))
      {
        geometry_error(layer, "rate must lie in [0, 1)");
      }
      break;
    case LayerKind::kFlatten:
      current = {shape_volume(current)};
      break;
    case LayerKind::kConcatTime:
      if (current.size() != 1)
      {
        geometry_error(layer, "time concatenation needs flattened frame features");
      }
      current        = {spec.window, current[0]};
      sequence_stage = true;
      break;
    case LayerKind::kGru:
    case LayerKind::kDense: {
      if (!sequence_stage)
      {
        if (current.size() != 1 || layer.kind == LayerKind::kGru)
        {
          geometry_error(layer, "recurrent layers need a time-concatenated input");
        }
        current        = {spec.window, current[0]};
        sequence_stage = true;
      }
      if (layer.units == 0)
      {
        geometry_error(layer, "zero units");
      }
      params  = param_count(layer, current[1]);
      current = {spec.window, layer.units};
      break;
    }
    case LayerKind::kMerge: {
      std::size_t total = 0;
      if (layer.inputs.empty())
      {
        geometry_error(layer, "merge without inputs");
      }
      for (auto const &in : layer.inputs)
      {
        auto it = widths.find(in);
        if (it == widths.end())
        {
          geometry_error(layer, "unknown merge input '" + in + "'");
        }
        total += it->second;
      }
      current = {spec.window, total};
      break;
    }
    }
    if (sequence_stage)
    {
      widths[layer.name] = current[1];
    }
    shapes.push_back(LayerShape{layer.name, current, params, decoder});
  };

  for (auto const &layer : spec.encoder)
  {
    visit(layer, false);
  }
  if (!spec.encoder.empty() && !sequence_stage)
  {
    throw Error("geometry", "encoder never reaches the sequence stage");
  }
  for (auto const &layer : spec.decoder)
  {
    visit(layer, true);
  }
  return shapes;
}

ParamReport count_params(ModelSpec const &spec)
{
  ParamReport report;
  if (spec.encoder.empty() && spec.decoder.empty())
  {
    return report;
  }
  for (auto const &s : infer_shapes(spec))
  {
    if (s.params > 0)
    {
      report.layers.emplace_back(s.name, s.params);
      report.total += s.params;
    }
  }
  return report;
}

std::string format_count(std::size_t count)
{
  char buf[64];
  if (count < 10000)
  {
    if (count >= 1000)
    {
      std::snprintf(buf, sizeof buf, "%zu,%03zu", count / 1000, count % 1000);
    }
    else
    {
      std::snprintf(buf, sizeof buf, "%zu", count);
    }
  }
  else if (count < 1000000)
  {
    std::snprintf(buf, sizeof buf, "%.2fK", static_cast<double>(count) / 1e3);
  }
  else
  {
    std::snprintf(buf, sizeof buf, "%.2fM", static_cast<double>(count) / 1e6);
  }
  return buf;
}

namespace {

json layer_to_json(LayerSpec const &l)
{
  json j = {{"name", l.name}, {"kind", layer_kind_name(l.kind)}};
  switch (l.kind)
  {
  case LayerKind::kConv2d:
  case LayerKind::kGru:
  case LayerKind::kDense:
    j["units"]      = l.units;
    j["activation"] = ops::activation_name(l.activation);
    break;
  case LayerKind::kMaxPool2d:
    j["window"] = l.window;
    break;
  case LayerKind::kDropout:
    j["rate"] = l.rate;
    break;
  case LayerKind::kMerge:
    j["inputs"] = l.inputs;
    break;
  default:
    break;
  }
  return j;
}

LayerSpec layer_from_json(json const &j)
{
  LayerSpec l;
  l.name       = j.at("name").get<std::string>();
  l.kind       = parse_layer_kind(j.at("kind").get<std::string>());
  l.units      = j.value("units", std::size_t{0});
  l.window     = j.value("window", std::size_t{0});
  l.rate       = j.value("rate", 0.0);
  l.activation = ops::parse_activation(j.value("activation", std::string("none")));
  if (j.contains("inputs"))
  {
    l.inputs = j.at("inputs").get<std::vector<std::string>>();
  }
  return l;
}

}  // namespace

std::string to_json(ModelSpec const &spec)
{
  json j;
  j["kind"]           = model_kind_name(spec.kind);
  j["window"]         = spec.window;
  j["image_side"]     = spec.image_side;
  j["width"]          = spec.width;
  j["sigmoid_output"] = spec.sigmoid_output;
  j["encoder"]        = json::array();
  for (auto const &l : spec.encoder)
  {
    j["encoder"].push_back(layer_to_json(l));
  }
  j["decoder"] = json::array();
  for (auto const &l : spec.decoder)
  {
    j["decoder"].push_back(layer_to_json(l));
  }
  return j.dump(2);
}

ModelSpec model_spec_from_json(std::string_view text)
{
  try
  {
    json const j = json::parse(text);
    ModelSpec  spec;
    spec.kind           = parse_model_kind(j.at("kind").get<std::string>());
    spec.window         = j.at("window").get<std::size_t>();
    spec.image_side     = j.at("image_side").get<std::size_t>();
    spec.width          = j.at("width").get<double>();
    spec.sigmoid_output = j.at("sigmoid_output").get<bool>();
    for (auto const &l : j.at("encoder"))
    {
      spec.encoder.push_back(layer_from_json(l));
    }
    for (auto const &l : j.at("decoder"))
    {
      spec.decoder.push_back(layer_from_json(l));
    }
    return spec;
  }
  catch (json::exception const &e)
  {
    throw Error("parse", std::string("model spec: ") + e.what());
  }
}

}  // namespace finemotion::net

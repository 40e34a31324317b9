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
#include "finemotion/netspec.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace finemotion;
using namespace finemotion::net;

namespace {

std::map<std::string, std::size_t> counts(ModelSpec const &spec)
{
  auto const                         report = count_params(spec);
  std::map<std::string, std::size_t> out(report.layers.begin(), report.layers.end());
  return out;
}

Shape output_of(ModelSpec const &spec, std::string const &name)
{
  for (auto const &s : infer_shapes(spec))
  {
    if (s.name == name)
    {
      return s.output;
    }
  }
  return {};
}

}  // namespace

TEST(BuildMf, DefaultLayerCountsMatchTable)
{
  auto const c = counts(build_mf());
  EXPECT_EQ(c.at("conv2d_1"), 320u);
  EXPECT_EQ(c.at("conv2d_2"), 9248u);
  EXPECT_EQ(c.at("conv2d_3"), 18496u);
  EXPECT_EQ(c.at("conv2d_4"), 36928u);
  EXPECT_EQ(c.at("conv2d_5"), 73856u);
  EXPECT_EQ(c.at("conv2d_6"), 147584u);
  EXPECT_EQ(c.at("conv2d_7"), 295168u);
  EXPECT_EQ(c.at("conv2d_8"), 590080u);
  EXPECT_EQ(c.at("conv2d_9"), 1180160u);
  EXPECT_EQ(c.at("conv2d_10"), 2359808u);
  EXPECT_EQ(c.at("gru_1"), 17307648u);
  EXPECT_EQ(c.at("gru_2"), 443136u);
  EXPECT_EQ(c.at("gru_3"), 2025u);
  EXPECT_EQ(c.size(), 13u);
}

TEST(BuildMf, DefaultShapes)
{
  auto const spec = build_mf();
  EXPECT_EQ(output_of(spec, "conv2d_1"), (Shape{224, 224, 32}));
  EXPECT_EQ(output_of(spec, "max_pooling2d_4"), (Shape{14, 14, 256}));
  EXPECT_EQ(output_of(spec, "max_pooling2d_5"), (Shape{3, 3, 512}));
  EXPECT_EQ(output_of(spec, "flatten"), (Shape{4608}));
  EXPECT_EQ(output_of(spec, "concatenate"), (Shape{8, 4608}));
  EXPECT_EQ(output_of(spec, "gru_1"), (Shape{8, 1024}));
  EXPECT_EQ(output_of(spec, "gru_3"), (Shape{8, 5}));
}

TEST(BuildMf, Side64Cascade)
{
  auto const spec = build_mf(8, 64);
  EXPECT_EQ(output_of(spec, "max_pooling2d_4"), (Shape{4, 4, 256}));
  EXPECT_EQ(output_of(spec, "max_pooling2d_5"), (Shape{1, 1, 512}));
  EXPECT_EQ(output_of(spec, "flatten"), (Shape{512}));
}

TEST(BuildMf, SmallSideClipsFinalPool)
{
  auto const spec = build_mf(2, 32, 0.125);
  EXPECT_EQ(output_of(spec, "max_pooling2d_5"), (Shape{1, 1, 64}));
  EXPECT_THROW(build_mf(8, 8), Error);
}

TEST(BuildMf, GeometryErrorNamesLayer)
{
  try
  {
    build_mf(8, 12);
    FAIL();
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.code(), "geometry");
    EXPECT_NE(std::string(e.what()).find("max_pooling2d"), std::string::npos);
  }
}

TEST(BuildCbmf, DecoderMatchesTable)
{
  auto const spec = build_cbmf();
  auto const c    = counts(spec);
  EXPECT_EQ(c.at("gru_3"), 7497u);
  EXPECT_EQ(c.at("gru_4"), 309504u);
  EXPECT_EQ(c.at("gru_5"), 148224u);
  EXPECT_EQ(c.at("gru_6"), 2025u);
  EXPECT_EQ(output_of(spec, "merge"), (Shape{8, 145}));
  EXPECT_EQ(output_of(spec, "gru_3"), (Shape{8, 17}));
}

TEST(CountParams, Totals)
{
  EXPECT_EQ(count_params(build_mf()).total, 22464457u);
  EXPECT_EQ(count_params(build_cbmf()).total, 22929682u);
  EXPECT_EQ(format_count(count_params(build_cbmf()).total), "22.93M");
  EXPECT_EQ(count_params(ModelSpec{}).total, 0u);
  auto const r   = count_params(build_cbmf());
  std::size_t sum = 0;
  for (auto const &[name, n] : r.layers)
  {
    sum += n;
  }
  EXPECT_EQ(sum, r.total);
}

TEST(CountParams, PrintedRounding)
{
  EXPECT_EQ(format_count(320), "320");
  EXPECT_EQ(format_count(9248), "9,248");
  EXPECT_EQ(format_count(2025), "2,025");
  EXPECT_EQ(format_count(18496), "18.50K");
  EXPECT_EQ(format_count(309504), "309.50K");
  EXPECT_EQ(format_count(148224), "148.22K");
  EXPECT_EQ(format_count(17307648), "17.31M");
  EXPECT_EQ(format_count(2359808), "2.36M");
}

TEST(BuildSf, DenseHead)
{
  auto const spec = build_sf();
  EXPECT_EQ(spec.window, 1u);
  EXPECT_EQ(output_of(spec, "dense_3"), (Shape{1, 5}));
  EXPECT_EQ(output_of(spec, "dense_1"), (Shape{1, 1024}));
  EXPECT_EQ(output_of(spec, "dense_2"), (Shape{1, 128}));
  auto const small = build_sf(64);
  EXPECT_EQ(output_of(small, "flatten"), (Shape{512}));
  auto s = spec;
  s.window = 2;
  EXPECT_THROW(infer_shapes(s), Error);
}

TEST(WidthMultiplier, ScalesHiddenButNotOutputs)
{
  auto const spec = build_cbmf(8, 64, 0.25);
  EXPECT_EQ(output_of(spec, "conv2d_1"), (Shape{64, 64, 8}));
  EXPECT_EQ(output_of(spec, "gru_1"), (Shape{8, 256}));
  EXPECT_EQ(output_of(spec, "gru_3"), (Shape{8, 17}));
  EXPECT_EQ(output_of(spec, "merge"), (Shape{8, 17 + 32}));
  EXPECT_EQ(output_of(spec, "gru_6"), (Shape{8, 5}));
  EXPECT_THROW(scaled_width(8, 0.0), Error);
}

TEST(ModelSpecJson, RoundTripsLosslessly)
{
  for (auto const &spec : {build_mf(), build_cbmf(4, 64, 0.25), build_sf(32, 0.125)})
  {
    auto const text = to_json(spec);
    auto const back = model_spec_from_json(text);
    EXPECT_EQ(back, spec);
    EXPECT_EQ(to_json(back), text);
  }
  EXPECT_THROW(model_spec_from_json("{\"kind\": \"MF\"}"), Error);
  EXPECT_THROW(model_spec_from_json("not json"), Error);
}

TEST(Names, KindsRoundTrip)
{
  for (auto k : {ModelKind::kSF, ModelKind::kMF, ModelKind::kCBMF})
  {
    EXPECT_EQ(parse_model_kind(model_kind_name(k)), k);
  }
  for (auto k : {LayerKind::kConv2d, LayerKind::kMaxPool2d, LayerKind::kDropout, LayerKind::kFlatten,
                 LayerKind::kConcatTime, LayerKind::kGru, LayerKind::kDense, LayerKind::kMerge})
  {
    EXPECT_EQ(parse_layer_kind(layer_kind_name(k)), k);
  }
  EXPECT_THROW(parse_model_kind("RNN"), Error);
}

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
#include "finemotion/network.hpp"

#include "../common/gradient_suite.hpp"

#include <gtest/gtest.h>

using namespace finemotion;
using namespace finemotion::net;

namespace {

std::vector<Image> random_frames(std::size_t count, std::size_t side, std::uint64_t seed)
{
  Rng                rng(seed);
  std::vector<Image> frames(count, Image(side * side));
  for (auto &f : frames)
  {
    for (auto &v : f)
    {
      v = uniform01(rng);
    }
  }
  return frames;
}

std::vector<Image const *> pointers(std::vector<Image> const &frames)
{
  std::vector<Image const *> out;
  for (auto const &f : frames)
  {
    out.push_back(&f);
  }
  return out;
}

}  // namespace

TEST(Network, MfOutputsProbabilities)
{
  Network    net(build_mf(4, 32, 0.125), 1);
  auto const frames = random_frames(4, 32, 2);
  auto const ptrs   = pointers(frames);
  auto const pred   = net.predict(ptrs);
  EXPECT_EQ(pred.presses.shape(), (Shape{4, 5}));
  EXPECT_TRUE(pred.configurations.empty());
  for (double p : pred.presses.values())
  {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Network, CbmfOutputsConfigurationsAndPresses)
{
  Network    net(build_cbmf(3, 32, 0.125), 1);
  auto const frames = random_frames(3, 32, 2);
  auto const pred   = net.predict(pointers(frames));
  EXPECT_EQ(pred.presses.shape(), (Shape{3, 5}));
  EXPECT_EQ(pred.configurations.shape(), (Shape{3, 17}));
}

TEST(Network, SfPredictsSinglePressVector)
{
  Network    net(build_sf(32, 0.125), 1);
  auto const frames = random_frames(1, 32, 2);
  auto const pred   = net.predict(pointers(frames));
  EXPECT_EQ(pred.presses.size(), 5u);
  for (double p : pred.presses.values())
  {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Network, InferenceIsBitIdentical)
{
  Network    a(build_cbmf(2, 32, 0.125), 7);
  Network    b(build_cbmf(2, 32, 0.125), 7);
  auto const frames = random_frames(2, 32, 3);
  auto const ptrs   = pointers(frames);
  EXPECT_EQ(a.predict(ptrs).presses, a.predict(ptrs).presses);
  EXPECT_EQ(a.predict(ptrs).presses, b.predict(ptrs).presses);
  EXPECT_EQ(a.params().checksum(), b.params().checksum());
}

TEST(Network, RejectsWrongWindowOrSide)
{
  Network    net(build_mf(4, 32, 0.125), 1);
  auto const frames = random_frames(3, 32, 2);
  EXPECT_THROW(net.predict(pointers(frames)), Error);
  auto const wrong = random_frames(4, 16, 2);
  EXPECT_THROW(net.predict(pointers(wrong)), Error);
}

TEST(Network, SharedCnnIsOrderIndependent)
{
  Network    net(build_mf(3, 32, 0.125), 4);
  auto const frames = random_frames(3, 32, 5);
  Image const *forward_order[]  = {&frames[0], &frames[1], &frames[2]};
  Image const *reversed_order[] = {&frames[2], &frames[1], &frames[0]};
  FrameWindow const a[] = {forward_order};
  FrameWindow const b[] = {reversed_order};
  Rng               rng(0);
  auto const        pa = net.forward(a, ops::Mode::kInfer, rng);
  auto const        pb = net.forward(b, ops::Mode::kInfer, rng);
  for (std::size_t i = 0; i < 3; ++i)
  {
    EXPECT_EQ(pa.frame_caches[i].back().output, pb.frame_caches[2 - i].back().output);
  }
}

TEST(Network, DecoderMergeReceivesEncoderConfigurations)
{
  Network    net(build_cbmf(2, 32, 0.125), 4);
  auto const frames = random_frames(2, 32, 5);
  auto const ptrs   = pointers(frames);
  FrameWindow const batch[] = {ptrs};
  Rng               rng(0);
  auto const        pass  = net.forward(batch, ops::Mode::kInfer, rng);
  auto const       &seq   = pass.sequences[0];
  auto const        names = net.spec();
  std::size_t       merge = 0, gru3 = 0, gru2 = 0, i = 0;
  for (auto const *layers : {&names.encoder, &names.decoder})
  {
    for (auto const &l : *layers)
    {
      if (l.kind == LayerKind::kConv2d || l.kind == LayerKind::kMaxPool2d || l.kind == LayerKind::kDropout ||
          l.kind == LayerKind::kFlatten)
      {
        continue;
      }
      if (l.name == "merge")
        merge = i;
      if (l.name == "gru_3")
        gru3 = i;
      if (l.name == "gru_2")
        gru2 = i;
      ++i;
    }
  }
  Tensor const &m = seq.outputs[merge];
  ASSERT_EQ(m.shape(), (Shape{2, 17 + 16}));
  for (std::size_t t = 0; t < 2; ++t)
  {
    for (std::size_t c = 0; c < 17; ++c)
    {
      EXPECT_EQ(m[t * 33 + c], seq.outputs[gru3][t * 17 + c]);
      EXPECT_EQ(m[t * 33 + c], pass.predictions[0].configurations[t * 17 + c]);
    }
    for (std::size_t c = 0; c < 16; ++c)
    {
      EXPECT_EQ(m[t * 33 + 17 + c], seq.outputs[gru2][t * 16 + c]);
    }
  }
}

TEST(Network, EncoderOnlyPassSkipsDecoder)
{
  Network    net(build_cbmf(2, 32, 0.125), 4);
  auto const frames = random_frames(2, 32, 5);
  auto const ptrs   = pointers(frames);
  FrameWindow const batch[] = {ptrs};
  Rng               rng(0);
  auto const        pass = net.forward(batch, ops::Mode::kInfer, rng, Heads::kEncoderOnly);
  EXPECT_TRUE(pass.predictions[0].presses.empty());
  EXPECT_EQ(pass.predictions[0].configurations.shape(), (Shape{2, 17}));
}

TEST(Network, DecoderReinitializationLeavesEncoder)
{
  Network     net(build_cbmf(2, 32, 0.125), 4);
  auto const  enc = net.encoder_checksum();
  auto const  dec = net.decoder_checksum();
  net.initialize_decoder(99);
  EXPECT_EQ(net.encoder_checksum(), enc);
  EXPECT_NE(net.decoder_checksum(), dec);
  auto const mask = net.encoder_mask();
  std::size_t decoder_entries = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
  {
    if (!mask[i])
    {
      ++decoder_entries;
      EXPECT_EQ(net.params().entries()[i].name.rfind("gru_", 0), 0u);
    }
  }
  EXPECT_EQ(decoder_entries, 12u);
}

TEST(Network, RebuildFromParameters)
{
  Network    a(build_mf(2, 32, 0.125), 11);
  Network    b(a.spec(), a.params());
  auto const frames = random_frames(2, 32, 5);
  EXPECT_EQ(a.predict(pointers(frames)).presses, b.predict(pointers(frames)).presses);
  ParamStore wrong;
  wrong.add("x", Tensor({1}));
  EXPECT_THROW(Network(a.spec(), wrong), Error);
}

TEST(Network, DuplicateFramesRunOnce)
{
  Network    net(build_mf(2, 32, 0.125), 4);
  auto const frames = random_frames(3, 32, 5);
  Image const *w0[] = {&frames[0], &frames[1]};
  Image const *w1[] = {&frames[1], &frames[2]};
  FrameWindow const batch[] = {w0, w1};
  Rng               rng(0);
  auto const        pass = net.forward(batch, ops::Mode::kTrain, rng);
  EXPECT_EQ(pass.frames.size(), 3u);
}

TEST(Network, FullCbmfGraphGradient)
{
  for (std::uint64_t seed = 0; seed < 3; ++seed)
  {
    auto const r = gradsuite::check_cbmf_graph(seed, 4);
    EXPECT_LE(r.error, 1e-4) << seed;
    EXPECT_GT(r.checked, 50u);
  }
}

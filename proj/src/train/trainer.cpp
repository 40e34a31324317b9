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
#include "finemotion/losses.hpp"
#include "finemotion/train.hpp"

#include <algorithm>
#include <memory>

namespace finemotion::train {
namespace {

// derive_seed stream tags
enum : std::uint64_t
{
  kTagShuffle = 11,
  kTagDropout,
  kTagDecoder
};

enum class Objective
{
  kBce,      // SF / MF
  kMse,      // CBMF phase 1, encoder only
  kCombined  // CBMF joint
};

struct Losses
{
  double bce = 0.0, mse = 0.0;
};

std::vector<net::Image const *> window_frames(WindowSet const &set, data::WindowRef const &w, std::size_t k)
{
  auto const &seq = set.dataset->sequences[w.sequence];
  if (w.start + k > seq.size())
  {
    throw Error("shape", "window runs past the end of sequence '" + seq.session_id + "'");
  }
  std::vector<net::Image const *> frames(k);
  for (std::size_t i = 0; i < k; ++i)
  {
    frames[i] = &seq.images[w.start + i];
  }
  return frames;
}

// Stacks the targets of several windows as (windows * k) x width tensors.
Tensor stacked_presses(WindowSet const &set, std::span<data::WindowRef const> windows, std::size_t k)
{
  Tensor      t({windows.size() * k, data::kFingers});
  std::size_t r = 0;
  for (auto const &w : windows)
  {
    auto const &seq = set.dataset->sequences[w.sequence];
    for (std::size_t i = 0; i < k; ++i, ++r)
    {
      for (std::size_t f = 0; f < data::kFingers; ++f)
      {
        t[r * data::kFingers + f] = seq.presses[w.start + i][f];
      }
    }
  }
  return t;
}

Tensor stacked_configs(WindowSet const &set, std::span<data::WindowRef const> windows, std::size_t k)
{
  Tensor      t({windows.size() * k, kin::kJointCount});
  std::size_t r = 0;
  for (auto const &w : windows)
  {
    auto const &seq = set.dataset->sequences[w.sequence];
    for (std::size_t i = 0; i < k; ++i, ++r)
    {
      std::copy(seq.configs[w.start + i].begin(), seq.configs[w.start + i].end(),
                t.data() + r * kin::kJointCount);
    }
  }
  return t;
}

Tensor stack(std::vector<Tensor> const &parts, std::size_t width)
{
  std::size_t rows = 0;
  for (auto const &p : parts)
  {
    rows += p.size() / width;
  }
  Tensor      out({rows, width});
  std::size_t offset = 0;
  for (auto const &p : parts)
  {
    std::copy(p.values().begin(), p.values().end(), out.data() + offset);
    offset += p.size();
  }
  return out;
}

// Splits a (windows * k) x width tensor back into k x width pieces.
std::vector<Tensor> unstack(Tensor const &t, std::size_t windows, std::size_t k)
{
  std::size_t const   width = t.dim(1);
  std::vector<Tensor> parts;
  for (std::size_t w = 0; w < windows; ++w)
  {
    Tensor part({k, width});
    std::copy(t.data() + w * k * width, t.data() + (w + 1) * k * width, part.data());
    parts.push_back(std::move(part));
  }
  return parts;
}

class Trainer
{
public:
  Trainer(TrainConfig const &config, WindowSet const &train, WindowSet const &test)
    : config_(config)
    , train_(train)
    , test_(test)
    , network_(model_spec(config), config.seed)
    , shuffle_rng_(derive_seed(config.seed, kTagShuffle))
    , dropout_rng_(derive_seed(config.seed, kTagDropout))
  {
    validate(config);
    if (train.dataset == nullptr || train.windows.empty())
    {
      throw Error("train", "empty training set");
    }
    for (std::size_t i = 0; i < train.windows.size(); i += config.train_stride)
    {
      order_.push_back(train.windows[i]);
    }
  }

  std::size_t k() const
  {
    return network_.spec().window;
  }

  net::Network &network()
  {
    return network_;
  }

  void run_epochs(std::size_t epochs, int phase, Objective objective, TrainResult &result)
  {
    std::vector<bool> active;
    if (objective == Objective::kMse)
    {
      active = network_.encoder_mask();
    }
    std::unique_ptr<bool[]> mask(new bool[active.size()]);
    std::copy(active.begin(), active.end(), mask.get());
    std::span<bool const> const mask_span(mask.get(), active.size());

    for (std::size_t e = 0; e < epochs; ++e)
    {
      shuffle(order_, shuffle_rng_);
      Losses      sum;
      std::size_t rows = 0;
      for (std::size_t b = 0; b < order_.size(); b += config_.batch_size)
      {
        std::size_t const n = std::min(config_.batch_size, order_.size() - b);
        Losses const      l = step(std::span(order_).subspan(b, n), objective, mask_span);
        sum.bce += l.bce * static_cast<double>(n);
        sum.mse += l.mse * static_cast<double>(n);
        rows += n;
      }
      EpochRecord rec;
      rec.epoch     = result.curve.size() + 1;
      rec.phase     = phase;
      rec.train_bce = sum.bce / static_cast<double>(rows);
      rec.train_mse = sum.mse / static_cast<double>(rows);
      if (!test_.windows.empty())
      {
        MetricsReport const m = evaluate(network_, test_, config_.threshold);
        rec.test_bce          = m.bce;
        rec.test_mse          = m.mse;
      }
      result.curve.push_back(rec);
    }
  }

private:
  Losses step(std::span<data::WindowRef const> batch, Objective objective, std::span<bool const> active)
  {
    std::vector<std::vector<net::Image const *>> frames;
    std::vector<net::FrameWindow>                windows;
    frames.reserve(batch.size());
    for (auto const &w : batch)
    {
      frames.push_back(window_frames(train_, w, k()));
      windows.emplace_back(frames.back());
    }
    net::Heads const heads = objective == Objective::kMse ? net::Heads::kEncoderOnly : net::Heads::kAll;
    net::ForwardPass const pass = network_.forward(windows, ops::Mode::kTrain, dropout_rng_, heads);

    Losses                          losses;
    std::vector<net::HeadGradients> grads(batch.size());
    bool const has_configs = network_.spec().kind == net::ModelKind::kCBMF;
    if (objective != Objective::kMse)
    {
      std::vector<Tensor> parts;
      for (auto const &p : pass.predictions)
      {
        parts.push_back(p.presses);
      }
      Tensor const predicted = stack(parts, data::kFingers);
      Tensor const labels    = stacked_presses(train_, batch, k());
      losses.bce             = loss_bce(predicted, labels);
      auto const g           = unstack(loss_bce_gradient(predicted, labels), batch.size(), k());
      for (std::size_t w = 0; w < batch.size(); ++w)
      {
        grads[w].presses = g[w];
      }
    }
    if (has_configs)
    {
      std::vector<Tensor> parts;
      for (auto const &p : pass.predictions)
      {
        parts.push_back(p.configurations);
      }
      Tensor const predicted = stack(parts, kin::kJointCount);
      Tensor const target    = stacked_configs(train_, batch, k());
      losses.mse             = loss_mse(predicted, target);
      double const scale     = objective == Objective::kMse ? 1.0 : config_.lambda;
      if (objective != Objective::kBce && scale > 0.0)
      {
        Tensor g = loss_mse_gradient(predicted, target);
        for (auto &v : g.values())
        {
          v *= scale;
        }
        auto const parts_g = unstack(g, batch.size(), k());
        for (std::size_t w = 0; w < batch.size(); ++w)
        {
          grads[w].configurations = parts_g[w];
        }
      }
    }
    std::vector<Tensor> param_grads = network_.params().zero_gradients();
    network_.backward(pass, grads, param_grads);
    adam_step(network_.params(), param_grads, AdamOptions{config_.learning_rate}, active);
    return losses;
  }

  TrainConfig                  config_;
  WindowSet const             &train_;
  WindowSet const             &test_;
  net::Network                 network_;
  Rng                          shuffle_rng_;
  Rng                          dropout_rng_;
  std::vector<data::WindowRef> order_;
};

}  // namespace

WindowPredictions predict_windows(net::Network const &network, WindowSet const &set)
{
  WindowPredictions out;
  std::size_t const k     = network.spec().window;
  std::size_t const chunk = 32;  // consecutive windows share most frames
  Rng               unused(0);
  for (std::size_t b = 0; b < set.windows.size(); b += chunk)
  {
    std::size_t const                            n = std::min(chunk, set.windows.size() - b);
    std::vector<std::vector<net::Image const *>> frames;
    std::vector<net::FrameWindow>                windows;
    frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      frames.push_back(window_frames(set, set.windows[b + i], k));
      windows.emplace_back(frames.back());
    }
    auto pass = network.forward(windows, ops::Mode::kInfer, unused);
    for (auto &p : pass.predictions)
    {
      out.presses.push_back(std::move(p.presses));
      if (!p.configurations.empty())
      {
        out.configs.push_back(std::move(p.configurations));
      }
    }
  }
  return out;
}

TrainResult train_mf(TrainConfig const &config, WindowSet const &train, WindowSet const &test)
{
  if (config.model == net::ModelKind::kCBMF)
  {
    throw Error("config", "train_mf expects an SF or MF model");
  }
  Trainer     t(config, train, test);
  TrainResult result;
  t.run_epochs(config.epochs, 0, Objective::kBce, result);
  result.params = t.network().params();
  return result;
}

TrainResult train_cbmf_phase_one(TrainConfig const &config, WindowSet const &train, WindowSet const &test)
{
  if (config.model != net::ModelKind::kCBMF)
  {
    throw Error("config", "train_cbmf_phase_one expects a CBMF model");
  }
  Trainer     t(config, train, test);
  TrainResult result;
  t.run_epochs(config.phase1_epochs, 1, Objective::kMse, result);
  result.phase1_encoder_checksum = t.network().encoder_checksum();
  result.params                  = t.network().params();
  return result;
}

TrainResult train_cbmf_two_phase(TrainConfig const &config, WindowSet const &train, WindowSet const &test)
{
  if (config.model != net::ModelKind::kCBMF)
  {
    throw Error("config", "train_cbmf_two_phase expects a CBMF model");
  }
  Trainer     t(config, train, test);
  TrainResult result;
  if (!config.two_phase)
  {
    t.run_epochs(config.epochs, 0, Objective::kCombined, result);
    result.params = t.network().params();
    return result;
  }
  t.run_epochs(config.phase1_epochs, 1, Objective::kMse, result);
  auto &net                      = t.network();
  result.phase1_encoder_checksum = net.encoder_checksum();
  std::uint64_t const decoder_seed = derive_seed(config.seed, kTagDecoder);
  net.initialize_decoder(decoder_seed);
  // moments collected while the decoder was frozen do not describe the new
  // objective
  net.params().reset_optimizer_state();
  result.phase2_encoder_checksum = net.encoder_checksum();
  result.phase2_decoder_checksum = net.decoder_checksum();
  net::Network fresh(net.spec(), config.seed + 1);
  fresh.initialize_decoder(decoder_seed);
  result.fresh_decoder_checksum = fresh.decoder_checksum();

  t.run_epochs(config.epochs - config.phase1_epochs, 2, Objective::kCombined, result);
  result.params = net.params();
  return result;
}

TrainResult train_model(TrainConfig const &config, WindowSet const &train, WindowSet const &test)
{
  return config.model == net::ModelKind::kCBMF ? train_cbmf_two_phase(config, train, test)
                                               : train_mf(config, train, test);
}

}  // namespace finemotion::train

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

#include "finemotion/datapipe.hpp"
#include "finemotion/netspec.hpp"
#include "finemotion/network.hpp"
#include "finemotion/param_store.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finemotion::train {

struct TrainConfig
{
  net::ModelKind model         = net::ModelKind::kCBMF;
  std::size_t    k             = 8;
  std::size_t    image_side    = 64;
  double         width         = 0.25;
  std::size_t    batch_size    = 32;
  std::size_t    epochs        = 20;
  std::size_t    phase1_epochs = 10;  // CBMF encoder-only epochs
  bool           two_phase     = true;
  double         learning_rate = 0.001;
  double         lambda        = 4.0;
  std::uint64_t  seed          = 0;
  int            fold          = -1;  // held-out fold for `train`, -1 trains on everything
  std::size_t    n_folds       = 5;
  std::string    task          = "all";  // piano, typing or all
  std::size_t    train_stride  = 1;  // keep every n-th training window
  std::string    dataset;
  double         threshold = 0.5;
  double         dropout   = 0.3;  // rate of the encoder's dropout layers
  std::array<int, 5>         notes{60, 62, 64, 65, 67};
  std::array<std::string, 5> keys{" ", "j", "k", "l", ";"};
};

/// Checks every field's range; throws Error("config").
void        validate(TrainConfig const &config);
std::string to_json(TrainConfig const &config);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig config_from_json(std::string_view text);
TrainConfig load_config(std::filesystem::path const &path);

net::ModelSpec model_spec(TrainConfig const &config);

/// Windows of a dataset, referenced by index.
struct WindowSet
{
  data::Dataset const   *dataset = nullptr;
  std::vector<data::WindowRef> windows;
};

/// Windows of length k (dataset.k when 0) at the dataset's stride over the
/// sequences whose task matches `task` ("all" keeps everything).
WindowSet select_task(data::Dataset const &dataset, std::string const &task, std::size_t k = 0);

struct EpochRecord
{
  std::size_t epoch      = 0;
  int         phase      = 0;  // 1 encoder-only, 2 joint, 0 single-phase
  double      train_bce  = 0.0;
  double      train_mse  = 0.0;
  double      test_bce   = 0.0;
  double      test_mse   = 0.0;
};

struct TrainResult
{
  ParamStore               params;
  std::vector<EpochRecord> curve;
  // CBMF two-phase probes: encoder checksum after phase 1 and both
  // checksums once the decoder has been re-initialized
  std::uint64_t phase1_encoder_checksum = 0;
  std::uint64_t phase2_encoder_checksum = 0;
  std::uint64_t phase2_decoder_checksum = 0;
  std::uint64_t fresh_decoder_checksum  = 0;  // decoder of a freshly seeded network
};

/// Minibatch Adam on L_BCE (SF, MF). Test losses are recorded per epoch when
/// `test` is non-empty.
TrainResult train_mf(TrainConfig const &config, WindowSet const &train, WindowSet const &test = {});

/// Phase 1 alone: the encoder trained on L_MSE for phase1_epochs, decoder
/// left at its initialization.
TrainResult train_cbmf_phase_one(TrainConfig const &config, WindowSet const &train, WindowSet const &test = {});

/// Encoder-only L_MSE for phase1_epochs, then a freshly initialized decoder
/// and lambda * L_MSE + L_BCE for the remaining epochs. With two_phase off
/// the joint loss is used from the first epoch.
TrainResult train_cbmf_two_phase(TrainConfig const &config, WindowSet const &train, WindowSet const &test = {});

/// Dispatches on config.model and config.two_phase.
TrainResult train_model(TrainConfig const &config, WindowSet const &train, WindowSet const &test = {});

struct Confusion
{
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  Confusion &operator+=(Confusion const &o)
  {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

struct Rates
{
  double accuracy = 0.0, recall = 0.0, precision = 0.0, f1 = 0.0;
};

/// Zero-denominator rule: a rate with an empty denominator is 0.
Rates rates(Confusion const &c);

struct MetricsReport
{
  Confusion                        pooled;
  std::array<Confusion, 5>         per_finger{};
  std::map<std::string, Confusion> per_subject;
  std::vector<Confusion>           per_fold;
  std::array<double, 17>           joint_mae{};  // radians, CBMF only
  bool                             has_joints = false;
  double                           bce        = 0.0;
  double                           mse        = 0.0;
  std::size_t                      windows    = 0;
};

/// Per-window predictions of a trained model.
struct WindowPredictions
{
  std::vector<Tensor> presses;  // k x 5 each
  std::vector<Tensor> configs;  // k x 17 each (CBMF)
};

WindowPredictions predict_windows(net::Network const &network, WindowSet const &set);

/// Micro-averaged decisions p >= threshold over every finger-timestep of
/// every window.
MetricsReport evaluate(net::Network const &network, WindowSet const &set, double threshold = 0.5);
MetricsReport evaluate_predictions(WindowPredictions const &predictions, WindowSet const &set,
                                   bool has_configs, double threshold = 0.5);

struct MetricSummary
{
  double mean = 0.0, std = 0.0;
};

struct FoldRun
{
  std::size_t                fold = 0;
  std::vector<std::string>   train_sessions;
  std::vector<std::string>   test_sessions;
  TrainResult                result;
  MetricsReport              metrics;
};

struct CrossvalReport
{
  data::FoldPlan                        plan;
  std::vector<FoldRun>                  folds;
  MetricsReport                         pooled;  // all held-out decisions together
  std::map<std::string, MetricSummary>  summary;  // accuracy/recall/precision/f1 over folds
  bool                                  audit_passed = false;
};

/// Folds are planned per task over the selected sessions; fold f holds out
/// the union of every task's fold f. Trainings run as parallel jobs.
CrossvalReport run_crossval(TrainConfig const &config, data::Dataset const &dataset);

/// Mean and population std of fold values, with std clipped to [0, 1].
MetricSummary summarize(std::vector<double> const &values);

/// Train and test window sets for one held-out fold.
std::pair<WindowSet, WindowSet> fold_windows(data::Dataset const &dataset, data::FoldPlan const &plan,
                                             std::size_t fold, std::string const &task, std::size_t k = 0);
data::FoldPlan plan_folds(data::Dataset const &dataset, std::string const &task, std::size_t n_folds,
                          std::uint64_t seed);

struct KCurve
{
  std::size_t              k = 0;
  net::ModelKind           model = net::ModelKind::kMF;
  std::vector<EpochRecord> curve;
};

/// MF per k (SF at k = 1), trained on the config's held-out split (fold 0
/// when config.fold is -1).
std::vector<KCurve> ablate_k(TrainConfig const &config, data::Dataset const &dataset,
                             std::vector<std::size_t> const &ks = {1, 2, 4, 6, 8});

struct LambdaRow
{
  double lambda    = 0.0;
  double final_bce = 0.0;  // test losses at the last epoch
  double final_mse = 0.0;
};

std::vector<LambdaRow> ablate_lambda(TrainConfig const &config, data::Dataset const &dataset,
                                     std::vector<double> const &lambdas = {0, 1, 2, 4, 8, 16, 32, 64});

/// Spearman rank correlation (average ranks for ties).
double spearman(std::vector<double> const &x, std::vector<double> const &y);

/// Runs job(i) for i in [0, n) on up to `threads` workers (FINEMOTION_THREADS
/// or the hardware concurrency when 0). Results must be written by index, so
/// the outcome never depends on the schedule. The first exception is
/// rethrown after all workers stop.
void        run_jobs(std::size_t n, std::function<void(std::size_t)> const &job, std::size_t threads = 0);
std::size_t worker_count();

// Parameter file: magic "FMPS", u32 version, u32 entry count, then per entry
// u16 name length, name, u32 rank, u32 extents, f64 values (little-endian).
void       save_params(ParamStore const &params, std::filesystem::path const &path);
ParamStore load_params(std::filesystem::path const &path);

}  // namespace finemotion::train

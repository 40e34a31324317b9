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
#include "finemotion/train.hpp"

#include <algorithm>
#include <set>

namespace finemotion::train {
namespace {

std::size_t model_k(TrainConfig const &c)
{
  return c.model == net::ModelKind::kSF ? 1 : c.k;
}

std::size_t held_out_fold(TrainConfig const &c)
{
  return c.fold < 0 ? 0 : static_cast<std::size_t>(c.fold);
}

}  // namespace

data::FoldPlan plan_folds(data::Dataset const &dataset, std::string const &task, std::size_t n_folds,
                          std::uint64_t seed)
{
  data::FoldPlan plan;
  plan.folds.resize(n_folds);
  auto const sizes = data::session_sizes(dataset);
  for (auto t : {data::Task::kPiano, data::Task::kTyping})
  {
    if (task != "all" && data::task_name(t) != task)
    {
      continue;
    }
    std::vector<data::SessionSize> group;
    for (std::size_t s = 0; s < dataset.sequences.size(); ++s)
    {
      if (dataset.sequences[s].task == t)
      {
        group.push_back(sizes[s]);
      }
    }
    if (group.empty())
    {
      continue;
    }
    auto const part = data::split_folds(group, n_folds, derive_seed(seed, static_cast<std::uint64_t>(t)));
    for (std::size_t f = 0; f < n_folds; ++f)
    {
      plan.folds[f].insert(plan.folds[f].end(), part.folds[f].begin(), part.folds[f].end());
    }
  }
  if (plan.folds[0].empty())
  {
    throw Error("range", "no sessions match task '" + task + "'");
  }
  return plan;
}

std::pair<WindowSet, WindowSet> fold_windows(data::Dataset const &dataset, data::FoldPlan const &plan,
                                             std::size_t fold, std::string const &task, std::size_t k)
{
  WindowSet const all = select_task(dataset, task, k);
  WindowSet       train{&dataset, {}}, test{&dataset, {}};
  for (auto const &w : all.windows)
  {
    std::size_t const f = plan.fold_of(dataset.sequences[w.sequence].session_id);
    if (f == plan.folds.size())
    {
      throw Error("range", "session '" + dataset.sequences[w.sequence].session_id + "' is in no fold");
    }
    (f == fold ? test : train).windows.push_back(w);
  }
  return {train, test};
}

CrossvalReport run_crossval(TrainConfig const &config, data::Dataset const &dataset)
{
  validate(config);
  CrossvalReport report;
  report.plan = plan_folds(dataset, config.task, config.n_folds, config.seed);
  report.folds.resize(config.n_folds);

  run_jobs(config.n_folds, [&](std::size_t f) {
    TrainConfig c = config;
    c.fold        = static_cast<int>(f);
    auto const [train, test] = fold_windows(dataset, report.plan, f, config.task, model_k(c));
    FoldRun &run = report.folds[f];
    run.fold     = f;
    std::set<std::string> train_ids, test_ids;
    for (auto const &w : train.windows)
    {
      train_ids.insert(dataset.sequences[w.sequence].session_id);
    }
    for (auto const &w : test.windows)
    {
      test_ids.insert(dataset.sequences[w.sequence].session_id);
    }
    run.train_sessions.assign(train_ids.begin(), train_ids.end());
    run.test_sessions.assign(test_ids.begin(), test_ids.end());
    run.result  = train_model(c, train, test);
    run.metrics = evaluate(net::Network(model_spec(c), run.result.params), test, c.threshold);
  });

  // audit: folds partition the sessions and no model saw its test sessions
  bool                  ok = true;
  std::set<std::string> seen;
  for (auto const &fold : report.plan.folds)
  {
    for (auto const &id : fold)
    {
      ok = ok && seen.insert(id).second;
    }
  }
  std::vector<double> acc, rec, prec, f1;
  for (auto const &run : report.folds)
  {
    for (auto const &id : run.test_sessions)
    {
      ok = ok && !std::binary_search(run.train_sessions.begin(), run.train_sessions.end(), id) &&
           report.plan.fold_of(id) == run.fold;
    }
    report.pooled.pooled += run.metrics.pooled;
    for (std::size_t f = 0; f < data::kFingers; ++f)
    {
      report.pooled.per_finger[f] += run.metrics.per_finger[f];
    }
    for (auto const &[subject, c] : run.metrics.per_subject)
    {
      report.pooled.per_subject[subject] += c;
    }
    report.pooled.per_fold.push_back(run.metrics.pooled);
    Rates const r = rates(run.metrics.pooled);
    acc.push_back(r.accuracy);
    rec.push_back(r.recall);
    prec.push_back(r.precision);
    f1.push_back(r.f1);
  }
  // window-weighted means of the continuous per-fold quantities
  std::size_t windows = 0;
  for (auto const &run : report.folds)
  {
    double const w = static_cast<double>(run.metrics.windows);
    report.pooled.bce += run.metrics.bce * w;
    report.pooled.mse += run.metrics.mse * w;
    for (std::size_t j = 0; j < kin::kJointCount; ++j)
    {
      report.pooled.joint_mae[j] += run.metrics.joint_mae[j] * w;
    }
    windows += run.metrics.windows;
    report.pooled.has_joints = run.metrics.has_joints;
  }
  if (windows > 0)
  {
    double const n = static_cast<double>(windows);
    report.pooled.bce /= n;
    report.pooled.mse /= n;
    for (auto &m : report.pooled.joint_mae)
    {
      m /= n;
    }
  }
  report.pooled.windows   = windows;
  report.summary["accuracy"]  = summarize(acc);
  report.summary["recall"]    = summarize(rec);
  report.summary["precision"] = summarize(prec);
  report.summary["f1"]        = summarize(f1);
  report.audit_passed         = ok;
  return report;
}

std::vector<KCurve> ablate_k(TrainConfig const &config, data::Dataset const &dataset,
                             std::vector<std::size_t> const &ks)
{
  validate(config);
  data::FoldPlan const plan = plan_folds(dataset, config.task, config.n_folds, config.seed);
  std::vector<KCurve>  out(ks.size());
  run_jobs(ks.size(), [&](std::size_t i) {
    TrainConfig c = config;
    c.k           = ks[i];
    c.model       = ks[i] == 1 ? net::ModelKind::kSF : net::ModelKind::kMF;
    auto const [train, test] = fold_windows(dataset, plan, held_out_fold(config), config.task, c.k);
    out[i].k     = ks[i];
    out[i].model = c.model;
    out[i].curve = train_model(c, train, test).curve;
  });
  return out;
}

std::vector<LambdaRow> ablate_lambda(TrainConfig const &config, data::Dataset const &dataset,
                                     std::vector<double> const &lambdas)
{
  TrainConfig base = config;
  base.model       = net::ModelKind::kCBMF;
  validate(base);
  data::FoldPlan const plan = plan_folds(dataset, base.task, base.n_folds, base.seed);
  auto const [train, test]  = fold_windows(dataset, plan, held_out_fold(base), base.task, base.k);
  std::vector<LambdaRow> out(lambdas.size());
  run_jobs(lambdas.size(), [&](std::size_t i) {
    TrainConfig c = base;
    c.lambda      = lambdas[i];
    auto const r  = train_model(c, train, test);
    out[i]        = {lambdas[i], r.curve.back().test_bce, r.curve.back().test_mse};
  });
  return out;
}

}  // namespace finemotion::train

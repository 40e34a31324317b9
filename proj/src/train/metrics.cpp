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
#include <cmath>
#include <numbers>
#include <numeric>

namespace finemotion::train {

Rates rates(Confusion const &c)
{
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  double const tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  double const fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  Rates        r;
  r.accuracy  = ratio(tp + tn, tp + fp + fn + tn);
  r.recall    = ratio(tp, tp + fn);
  r.precision = ratio(tp, tp + fp);
  r.f1        = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  return r;
}

MetricsReport evaluate_predictions(WindowPredictions const &pred, WindowSet const &set, bool has_configs,
                                   double threshold)
{
  if (pred.presses.size() != set.windows.size() || (has_configs && pred.configs.size() != set.windows.size()))
  {
    throw Error("shape", "prediction count does not match the window count");
  }
  MetricsReport report;
  report.windows    = set.windows.size();
  report.has_joints = has_configs;
  double      bce_sum = 0.0, mse_sum = 0.0;
  std::size_t rows    = 0;
  for (std::size_t w = 0; w < set.windows.size(); ++w)
  {
    auto const &ref = set.windows[w];
    auto const &seq = set.dataset->sequences[ref.sequence];
    Tensor const &p = pred.presses[w];
    std::size_t const k = p.dim(0);
    Tensor labels({k, data::kFingers});
    auto  &subject = report.per_subject[seq.subject];
    for (std::size_t t = 0; t < k; ++t)
    {
      for (std::size_t f = 0; f < data::kFingers; ++f)
      {
        bool const truth    = seq.presses[ref.start + t][f] != 0;
        bool const decision = p[t * data::kFingers + f] >= threshold;
        labels[t * data::kFingers + f] = truth ? 1.0 : 0.0;
        Confusion c;
        (truth ? (decision ? c.tp : c.fn) : (decision ? c.fp : c.tn)) = 1;
        report.pooled += c;
        report.per_finger[f] += c;
        subject += c;
      }
    }
    bce_sum += loss_bce(p, labels) * static_cast<double>(k);
    if (has_configs)
    {
      Tensor const &x = pred.configs[w];
      Tensor        target({k, kin::kJointCount});
      for (std::size_t t = 0; t < k; ++t)
      {
        for (std::size_t j = 0; j < kin::kJointCount; ++j)
        {
          double const truth = seq.configs[ref.start + t][j];
          target[t * kin::kJointCount + j] = truth;
          report.joint_mae[j] += std::abs(x[t * kin::kJointCount + j] - truth) * std::numbers::pi;
        }
      }
      mse_sum += loss_mse(x, target) * static_cast<double>(k);
    }
    rows += k;
  }
  if (rows > 0)
  {
    report.bce = bce_sum / static_cast<double>(rows);
    report.mse = mse_sum / static_cast<double>(rows);
    for (auto &m : report.joint_mae)
    {
      m /= static_cast<double>(rows);
    }
  }
  return report;
}

MetricsReport evaluate(net::Network const &network, WindowSet const &set, double threshold)
{
  return evaluate_predictions(predict_windows(network, set), set,
                              network.spec().kind == net::ModelKind::kCBMF, threshold);
}

MetricSummary summarize(std::vector<double> const &values)
{
  MetricSummary s;
  if (values.empty())
  {
    return s;
  }
  double const n = static_cast<double>(values.size());
  s.mean         = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var     = 0.0;
  for (double v : values)
  {
    var += (v - s.mean) * (v - s.mean);
  }
  s.std = std::clamp(std::sqrt(var / n), 0.0, 1.0);
  return s;
}

double spearman(std::vector<double> const &x, std::vector<double> const &y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw Error("shape", "spearman needs two equally long samples of size >= 2");
  }
  auto ranks = [](std::vector<double> const &v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();)
    {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
      {
        ++j;
      }
      double const avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t m = i; m <= j; ++m)
      {
        r[idx[m]] = avg;
      }
      i = j + 1;
    }
    return r;
  };
  auto const   rx = ranks(x), ry = ranks(y);
  double const n  = static_cast<double>(x.size());
  double const mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double const my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double       sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i)
  {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

}  // namespace finemotion::train

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

#include "finemotion/datapipe.hpp"
#include "finemotion/error.hpp"
#include "finemotion/kinematics.hpp"
#include "finemotion/netspec.hpp"
#include "finemotion/replay.hpp"
#include "finemotion/synthlab.hpp"
#include "finemotion/text.hpp"
#include "finemotion/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace finemotion;

namespace {

struct Common
{
  std::string                  config;
  std::optional<std::uint64_t> seed;
  std::string                  out;
};

void add_common(CLI::App *cmd, Common &c, bool needs_out = true)
{
  cmd->add_option("--config", c.config, "run configuration (JSON)");
  cmd->add_option("--seed", c.seed, "overrides the configuration seed");
  auto *out = cmd->add_option("--out", c.out, "output directory");
  if (needs_out)
  {
    out->required();
  }
}

train::TrainConfig load(Common const &c)
{
  train::TrainConfig config = c.config.empty() ? train::TrainConfig{} : train::load_config(c.config);
  if (c.seed)
  {
    config.seed = *c.seed;
  }
  train::validate(config);
  return config;
}

fs::path out_dir(Common const &c)
{
  fs::path const dir(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_file(fs::path const &path, std::string const &text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
  {
    throw Error("io", "cannot write '" + path.string() + "'");
  }
}

std::string fmt(double v)
{
  return format_double(v);
}

// CSV field, quoted when it holds a delimiter (table counts like "9,248").
std::string csv_field(std::string const &text)
{
  return text.find(',') == std::string::npos ? text : '"' + text + '"';
}

data::Dataset load_dataset_for(train::TrainConfig const &config, std::string const &override_path)
{
  std::string const path = override_path.empty() ? config.dataset : override_path;
  if (path.empty())
  {
    throw Error("config", "no dataset given (set \"dataset\" or pass --dataset)");
  }
  data::Dataset ds = data::load_dataset(path);
  if (ds.side != config.image_side)
  {
    throw Error("config", "dataset images are " + std::to_string(ds.side) + " px but image_side is " +
                              std::to_string(config.image_side));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// metrics tables

json rates_json(train::Confusion const &c)
{
  auto const r = train::rates(c);
  return {{"accuracy", r.accuracy}, {"recall", r.recall}, {"precision", r.precision}, {"f1", r.f1},
          {"tp", c.tp},             {"fp", c.fp},         {"fn", c.fn},               {"tn", c.tn}};
}

void metrics_row(std::ostream &out, std::string const &scope, std::string const &name, train::Confusion const &c)
{
  auto const r = train::rates(c);
  out << scope << ',' << name << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
      << fmt(r.accuracy) << ',' << fmt(r.recall) << ',' << fmt(r.precision) << ',' << fmt(r.f1) << '\n';
}

std::string metrics_table(train::MetricsReport const &m)
{
  std::ostringstream out;
  out << "scope,name,tp,fp,fn,tn,accuracy,recall,precision,f1\n";
  metrics_row(out, "pooled", "all", m.pooled);
  for (std::size_t f = 0; f < m.per_finger.size(); ++f)
  {
    metrics_row(out, "finger", std::to_string(f + 1), m.per_finger[f]);
  }
  for (auto const &[subject, c] : m.per_subject)
  {
    metrics_row(out, "subject", subject, c);
  }
  for (std::size_t f = 0; f < m.per_fold.size(); ++f)
  {
    metrics_row(out, "fold", std::to_string(f), m.per_fold[f]);
  }
  return out.str();
}

std::string joints_table(train::MetricsReport const &m)
{
  std::ostringstream out;
  out << "joint,name,mae_rad\n";
  for (std::size_t j = 0; j < m.joint_mae.size(); ++j)
  {
    out << j << ',' << kin::joint_name(j) << ',' << fmt(m.joint_mae[j]) << '\n';
  }
  return out.str();
}

json metrics_json(train::MetricsReport const &m)
{
  json j;
  j["pooled"]  = rates_json(m.pooled);
  j["bce"]     = m.bce;
  j["mse"]     = m.mse;
  j["windows"] = m.windows;
  for (std::size_t f = 0; f < m.per_finger.size(); ++f)
  {
    j["per_finger"][std::to_string(f + 1)] = rates_json(m.per_finger[f]);
  }
  for (auto const &[subject, c] : m.per_subject)
  {
    j["per_subject"][subject] = rates_json(c);
  }
  if (m.has_joints)
  {
    j["joint_mae_rad"] = m.joint_mae;
  }
  return j;
}

std::string curve_table(std::vector<train::EpochRecord> const &curve)
{
  std::ostringstream out;
  out << "epoch,phase,train_bce,train_mse,test_bce,test_mse\n";
  for (auto const &e : curve)
  {
    out << e.epoch << ',' << e.phase << ',' << fmt(e.train_bce) << ',' << fmt(e.train_mse) << ','
        << fmt(e.test_bce) << ',' << fmt(e.test_mse) << '\n';
  }
  return out.str();
}

// Per-frame probabilities: the mean over every window covering the frame,
// zero where no window reaches.
std::map<std::size_t, std::vector<replay::FrameProbabilities>>
frame_probabilities(train::WindowPredictions const &pred, train::WindowSet const &set, std::size_t k)
{
  std::map<std::size_t, std::vector<replay::FrameProbabilities>> sums;
  std::map<std::size_t, std::vector<std::size_t>>                 counts;
  for (std::size_t w = 0; w < set.windows.size(); ++w)
  {
    auto const &ref = set.windows[w];
    auto const  n   = set.dataset->sequences[ref.sequence].size();
    auto       &s   = sums[ref.sequence];
    auto       &c   = counts[ref.sequence];
    s.resize(n);
    c.resize(n);
    for (std::size_t i = 0; i < k; ++i)
    {
      for (std::size_t f = 0; f < data::kFingers; ++f)
      {
        s[ref.start + i][f] += pred.presses[w][i * data::kFingers + f];
      }
      ++c[ref.start + i];
    }
  }
  for (auto &[seq, s] : sums)
  {
    for (std::size_t i = 0; i < s.size(); ++i)
    {
      for (auto &v : s[i])
      {
        v = counts[seq][i] > 0 ? v / static_cast<double>(counts[seq][i]) : 0.0;
      }
    }
  }
  return sums;
}

// ---------------------------------------------------------------------------
// subcommands

struct SynthOptions
{
  std::size_t subjects = 4;
  std::size_t sessions = 2;
  std::string task     = "all";
  double      duration = 90.0;
  double      rate     = 20.0;
  std::size_t side     = 64;
  double      sigma    = 0.2;
};

void run_synth_gen(Common const &c, SynthOptions const &o)
{
  if (o.task != "all")
  {
    data::parse_task(o.task);
  }
  fs::path const dir  = out_dir(c);
  json           list = json::array();
  for (auto task : {data::Task::kPiano, data::Task::kTyping})
  {
    if (o.task != "all" && data::task_name(task) != o.task)
    {
      continue;
    }
    for (std::size_t s = 0; s < o.subjects; ++s)
    {
      for (std::size_t i = 0; i < o.sessions; ++i)
      {
        synth::SessionRequest r;
        r.seed       = c.seed.value_or(0);
        r.task       = task;
        r.subject    = s;
        r.index      = i;
        r.duration   = o.duration;
        r.frame_rate = o.rate;
        r.side       = o.side;
        r.sigma      = o.sigma;
        auto const session = synth::gen_session(r);
        data::write_session(session, dir / session.id);
        list.push_back({{"id", session.id},
                        {"subject", session.subject},
                        {"task", data::task_name(task)},
                        {"frames", session.frames.size()},
                        {"events", session.events.events.size()}});
      }
    }
  }
  json summary{{"seed", c.seed.value_or(0)}, {"sessions", list}, {"duration_s", o.duration},
               {"frame_rate", o.rate},       {"side", o.side},   {"sigma", o.sigma}};
  write_file(dir / "synth_summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << list.size() << " sessions to " << dir.string() << "\n";
}

void run_extract_config(Common const &c, std::string const &input)
{
  std::ifstream in(input);
  if (!in)
  {
    throw Error("io", "cannot open marker file '" + input + "'");
  }
  auto const                      frames = kin::read_marker_csv(in);
  std::vector<double>             times;
  std::vector<kin::Configuration> configs;
  for (auto const &f : frames)
  {
    times.push_back(f.time);
    configs.push_back(kin::extract_configuration(f));
  }
  std::ostringstream out;
  kin::write_configuration_csv(out, times, configs);
  fs::path const dir = out_dir(c);
  write_file(dir / "configurations.csv", out.str());
  std::cout << "extracted " << configs.size() << " configurations\n";
}

void run_build_dataset(Common const &c, std::string const &input, std::size_t stride)
{
  train::TrainConfig const config = load(c);
  std::vector<fs::path>    dirs;
  for (auto const &entry : fs::directory_iterator(input))
  {
    if (entry.is_directory() && fs::exists(entry.path() / "session.json"))
    {
      dirs.push_back(entry.path());
    }
  }
  if (dirs.empty())
  {
    throw Error("io", "no session directories under '" + input + "'");
  }
  std::sort(dirs.begin(), dirs.end());
  data::Dataset ds;
  ds.k      = config.k;
  ds.stride = stride;
  ds.side   = config.image_side;
  json list = json::array();
  for (auto const &d : dirs)
  {
    auto seq = data::align(data::read_session(d), config.image_side);
    list.push_back({{"id", seq.session_id},
                    {"subject", seq.subject},
                    {"task", data::task_name(seq.task)},
                    {"frames", seq.size()},
                    {"dropped", seq.dropped}});
    ds.sequences.push_back(std::move(seq));
  }
  ds.rebuild_windows(config.k, stride);
  fs::path const dir = out_dir(c);
  data::save_dataset(ds, dir / "dataset.fmds");
  json summary{{"k", ds.k}, {"stride", ds.stride}, {"side", ds.side}, {"windows", ds.windows.size()},
               {"sessions", list}};
  write_file(dir / "dataset_summary.json", summary.dump(2) + "\n");
  std::cout << "dataset: " << ds.sequences.size() << " sessions, " << ds.windows.size() << " windows\n";
}

void run_train(Common const &c, std::string const &dataset_path)
{
  train::TrainConfig const config = load(c);
  data::Dataset const      ds     = load_dataset_for(config, dataset_path);
  train::WindowSet         train_set, test_set;
  if (config.fold >= 0)
  {
    auto const plan = train::plan_folds(ds, config.task, config.n_folds, config.seed);
    std::tie(train_set, test_set) = train::fold_windows(ds, plan, static_cast<std::size_t>(config.fold),
                                                        config.task, train::model_spec(config).window);
  }
  else
  {
    train_set = train::select_task(ds, config.task, train::model_spec(config).window);
  }
  auto const     result = train::train_model(config, train_set, test_set);
  fs::path const dir    = out_dir(c);
  train::save_params(result.params, dir / "params.fmps");
  write_file(dir / "curve.csv", curve_table(result.curve));
  json summary{{"model", net::model_kind_name(config.model)},
               {"train_windows", train_set.windows.size()},
               {"test_windows", test_set.windows.size()},
               {"final_train_bce", result.curve.back().train_bce},
               {"final_train_mse", result.curve.back().train_mse},
               {"params_checksum", result.params.checksum()},
               {"config", json::parse(train::to_json(config))}};
  if (config.model == net::ModelKind::kCBMF && config.two_phase)
  {
    summary["phase1_encoder_checksum"] = result.phase1_encoder_checksum;
    summary["phase2_encoder_checksum"] = result.phase2_encoder_checksum;
    summary["phase2_decoder_checksum"] = result.phase2_decoder_checksum;
    summary["fresh_decoder_checksum"]  = result.fresh_decoder_checksum;
  }
  if (!test_set.windows.empty())
  {
    summary["final_test_bce"] = result.curve.back().test_bce;
    summary["final_test_mse"] = result.curve.back().test_mse;
  }
  write_file(dir / "train_summary.json", summary.dump(2) + "\n");
  std::cout << "trained " << net::model_kind_name(config.model) << " on " << train_set.windows.size()
            << " windows; final train BCE " << fmt(result.curve.back().train_bce) << "\n";
}

void run_crossval(Common const &c, std::string const &dataset_path)
{
  train::TrainConfig const config = load(c);
  data::Dataset const      ds     = load_dataset_for(config, dataset_path);
  auto const               report = train::run_crossval(config, ds);
  fs::path const           dir    = out_dir(c);

  std::ostringstream folds;
  folds << "fold,session\n";
  for (std::size_t f = 0; f < report.plan.folds.size(); ++f)
  {
    for (auto const &s : report.plan.folds[f])
    {
      folds << f << ',' << s << '\n';
    }
  }
  write_file(dir / "folds.csv", folds.str());
  write_file(dir / "metrics.csv", metrics_table(report.pooled));
  if (report.pooled.has_joints)
  {
    write_file(dir / "joints.csv", joints_table(report.pooled));
  }
  std::ostringstream curves;
  curves << "fold,epoch,phase,train_bce,train_mse,test_bce,test_mse\n";
  for (auto const &f : report.folds)
  {
    for (auto const &e : f.result.curve)
    {
      curves << f.fold << ',' << e.epoch << ',' << e.phase << ',' << fmt(e.train_bce) << ','
             << fmt(e.train_mse) << ',' << fmt(e.test_bce) << ',' << fmt(e.test_mse) << '\n';
    }
  }
  write_file(dir / "curves.csv", curves.str());

  json summary       = metrics_json(report.pooled);
  summary["model"]   = net::model_kind_name(config.model);
  summary["task"]    = config.task;
  summary["audit_passed"] = report.audit_passed;
  for (auto const &[name, s] : report.summary)
  {
    summary["over_folds"][name] = {{"mean", s.mean}, {"std", s.std}};
  }
  write_file(dir / "crossval_summary.json", summary.dump(2) + "\n");
  auto const r = train::rates(report.pooled.pooled);
  std::cout << "crossval " << net::model_kind_name(config.model) << " " << config.task << ": pooled F1 "
            << fmt(r.f1) << ", audit " << (report.audit_passed ? "passed" : "FAILED") << "\n";
  if (!report.audit_passed)
  {
    throw Error("audit", "a test window came from a trained-on session");
  }
}

void run_eval(Common const &c, std::string const &dataset_path, std::string const &params_path)
{
  train::TrainConfig const config = load(c);
  data::Dataset const      ds     = load_dataset_for(config, dataset_path);
  net::Network const       network(train::model_spec(config), train::load_params(params_path));
  std::size_t const        k = network.spec().window;
  train::WindowSet         set;
  if (config.fold >= 0)
  {
    auto const plan = train::plan_folds(ds, config.task, config.n_folds, config.seed);
    set = train::fold_windows(ds, plan, static_cast<std::size_t>(config.fold), config.task, k).second;
  }
  else
  {
    set = train::select_task(ds, config.task, k);
  }
  auto const pred    = train::predict_windows(network, set);
  auto const metrics = train::evaluate_predictions(pred, set, !pred.configs.empty(), config.threshold);

  fs::path const dir = out_dir(c);
  write_file(dir / "metrics.csv", metrics_table(metrics));
  if (metrics.has_joints)
  {
    write_file(dir / "joints.csv", joints_table(metrics));
  }
  fs::create_directories(dir / "probabilities");
  for (auto const &[seq, probs] : frame_probabilities(pred, set, k))
  {
    auto const        &s = ds.sequences[seq];
    std::ostringstream out;
    out << "time_s,p1,p2,p3,p4,p5\n";
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
      out << fmt(s.times[i]);
      for (double p : probs[i])
      {
        out << ',' << fmt(p);
      }
      out << '\n';
    }
    write_file(dir / "probabilities" / (s.session_id + ".csv"), out.str());
  }
  json summary     = metrics_json(metrics);
  summary["model"] = net::model_kind_name(config.model);
  write_file(dir / "eval_summary.json", summary.dump(2) + "\n");
  std::cout << "evaluated " << metrics.windows << " windows: F1 " << fmt(train::rates(metrics.pooled).f1) << "\n";
}

std::vector<std::size_t> parse_sizes(std::string const &text)
{
  std::vector<std::size_t> out;
  for (auto f : split_fields(text))
  {
    out.push_back(parse_size(f, "list entry"));
  }
  return out;
}

std::vector<double> parse_doubles(std::string const &text)
{
  std::vector<double> out;
  for (auto f : split_fields(text))
  {
    out.push_back(parse_double(f, "list entry"));
  }
  return out;
}

void run_ablate_k(Common const &c, std::string const &dataset_path, std::string const &ks)
{
  train::TrainConfig const config = load(c);
  data::Dataset const      ds     = load_dataset_for(config, dataset_path);
  auto const               curves = train::ablate_k(config, ds, parse_sizes(ks));
  std::ostringstream       out;
  out << "k,model,epoch,train_bce,test_bce,test_mse\n";
  json finals = json::array();
  for (auto const &k : curves)
  {
    for (auto const &e : k.curve)
    {
      out << k.k << ',' << net::model_kind_name(k.model) << ',' << e.epoch << ',' << fmt(e.train_bce) << ','
          << fmt(e.test_bce) << ',' << fmt(e.test_mse) << '\n';
    }
    finals.push_back({{"k", k.k}, {"model", net::model_kind_name(k.model)}, {"final_test_bce", k.curve.back().test_bce}});
  }
  fs::path const dir = out_dir(c);
  write_file(dir / "k_sweep.csv", out.str());
  write_file(dir / "k_sweep_summary.json", json{{"task", config.task}, {"runs", finals}}.dump(2) + "\n");
  std::cout << "k sweep: " << curves.size() << " curves\n";
}

void run_ablate_lambda(Common const &c, std::string const &dataset_path, std::string const &lambdas)
{
  train::TrainConfig const config = load(c);
  data::Dataset const      ds     = load_dataset_for(config, dataset_path);
  auto const               rows   = train::ablate_lambda(config, ds, parse_doubles(lambdas));
  std::ostringstream       out;
  out << "lambda,final_test_bce,final_test_mse\n";
  std::vector<double> l, b, m;
  for (auto const &r : rows)
  {
    out << fmt(r.lambda) << ',' << fmt(r.final_bce) << ',' << fmt(r.final_mse) << '\n';
    l.push_back(r.lambda);
    b.push_back(r.final_bce);
    m.push_back(r.final_mse);
  }
  fs::path const dir = out_dir(c);
  write_file(dir / "lambda_sweep.csv", out.str());
  json summary{{"rows", rows.size()}};
  if (rows.size() >= 2)
  {
    summary["spearman_lambda_mse"] = train::spearman(l, m);
    summary["spearman_lambda_bce"] = train::spearman(l, b);
  }
  write_file(dir / "lambda_sweep_summary.json", summary.dump(2) + "\n");
  std::cout << "lambda sweep: " << rows.size() << " rows\n";
}

void run_replay(Common const &c, std::string const &input, double rate, std::string const &mode)
{
  train::TrainConfig const config = load(c);
  std::ifstream            in(input);
  if (!in)
  {
    throw Error("io", "cannot open probability file '" + input + "'");
  }
  std::string line;
  read_line(in, line);  // header
  std::vector<replay::FrameProbabilities> probs;
  while (read_line(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    auto const fields = split_fields(line);
    if (fields.size() != 6)
    {
      throw Error("parse", "probability row " + std::to_string(probs.size() + 2) + " needs 6 fields");
    }
    replay::FrameProbabilities p{};
    for (std::size_t f = 0; f < 5; ++f)
    {
      p[f] = parse_double(fields[f + 1], "probability");
    }
    probs.push_back(p);
  }
  auto const     events = replay::extract_events(probs, rate, config.threshold);
  fs::path const dir    = out_dir(c);
  std::ostringstream table;
  json summary{{"mode", mode}, {"events", events.size()}, {"frames", probs.size()}, {"frame_rate", rate}};
  if (mode == "piano")
  {
    table << "finger,note,onset_s,release_s\n";
    for (auto const &e : events)
    {
      table << e.finger << ',' << config.notes[e.finger - 1] << ',' << fmt(e.onset) << ',' << fmt(e.release)
            << '\n';
    }
    auto const bytes = replay::write_midi(replay::to_notes(events, config.notes));
    write_file(dir / "replay.mid", std::string(bytes.begin(), bytes.end()));
  }
  else if (mode == "typing")
  {
    table << "finger,key,onset_s,release_s\n";
    for (auto const &e : events)
    {
      table << e.finger << ',' << config.keys[e.finger - 1] << ',' << fmt(e.onset) << ',' << fmt(e.release)
            << '\n';
    }
    std::string const text = replay::to_text(events, config.keys);
    write_file(dir / "replay.txt", text);
    summary["text"] = text;
  }
  else
  {
    throw Error("config", "replay mode must be piano or typing");
  }
  write_file(dir / "events.csv", table.str());
  write_file(dir / "replay_summary.json", summary.dump(2) + "\n");
  std::cout << "replayed " << events.size() << " events\n";
}

// Totals printed under the two architecture tables.
struct PrintedTotal
{
  net::ModelKind kind;
  char const    *text;
};
constexpr PrintedTotal kPrintedTotals[] = {{net::ModelKind::kMF, "22.93M"}, {net::ModelKind::kCBMF, "22.93M"}};

void run_count_params(Common const &c, std::string const &model, std::size_t k, std::size_t side, double width)
{
  std::vector<net::ModelKind> kinds;
  if (model == "all")
  {
    kinds = {net::ModelKind::kSF, net::ModelKind::kMF, net::ModelKind::kCBMF};
  }
  else
  {
    kinds = {net::parse_model_kind(model)};
  }
  bool const         table_geometry = k == 8 && side == 224 && width == 1.0;
  std::ostringstream out;
  out << "model,layer,params,rounded\n";
  std::vector<std::string> notes;
  for (auto kind : kinds)
  {
    auto const report = net::count_params(net::build_model(kind, k, side, width));
    auto const name   = std::string(net::model_kind_name(kind));
    for (auto const &[layer, n] : report.layers)
    {
      out << name << ',' << layer << ',' << n << ',' << csv_field(net::format_count(n)) << '\n';
    }
    out << name << ",total," << report.total << ',' << csv_field(net::format_count(report.total)) << '\n';
    for (auto const &p : kPrintedTotals)
    {
      if (table_geometry && p.kind == kind && net::format_count(report.total) != p.text)
      {
        notes.push_back("note: " + name + " table prints total " + p.text + " but its rows sum to " +
                        std::to_string(report.total) + " (" + net::format_count(report.total) + ")");
      }
    }
  }
  std::cout << out.str();
  for (auto const &n : notes)
  {
    std::cout << n << '\n';
  }
  if (!c.out.empty())
  {
    fs::path const dir = out_dir(c);
    write_file(dir / "params.csv", out.str());
  }
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"finemotion: finger-press inference from image sequences"};
  app.require_subcommand(1);

  Common       common;
  SynthOptions synth;
  std::string  input, dataset, params_path, ks = "1,2,4,6,8", lambdas = "0,1,2,4,8,16,32,64", mode = "piano",
                                         model = "all";
  std::size_t stride = 1, k = 8, side = 224;
  double      rate = 20.0, width = 1.0;

  auto *synth_cmd = app.add_subcommand("synth-gen", "generate synthetic recording sessions");
  add_common(synth_cmd, common);
  synth_cmd->add_option("--subjects", synth.subjects);
  synth_cmd->add_option("--sessions", synth.sessions, "sessions per subject and task");
  synth_cmd->add_option("--task", synth.task, "piano, typing or all");
  synth_cmd->add_option("--duration", synth.duration, "seconds");
  synth_cmd->add_option("--rate", synth.rate, "frames per second");
  synth_cmd->add_option("--side", synth.side, "image side in pixels");
  synth_cmd->add_option("--sigma", synth.sigma, "image noise scale");

  auto *extract_cmd = app.add_subcommand("extract-config", "marker CSV to joint-angle CSV");
  add_common(extract_cmd, common);
  extract_cmd->add_option("--input", input, "marker CSV")->required();

  auto *build_cmd = app.add_subcommand("build-dataset", "align session directories into a dataset");
  add_common(build_cmd, common);
  build_cmd->add_option("--input", input, "directory of sessions")->required();
  build_cmd->add_option("--stride", stride, "window stride");

  auto *train_cmd = app.add_subcommand("train", "train one model");
  add_common(train_cmd, common);
  train_cmd->add_option("--dataset", dataset);

  auto *cv_cmd = app.add_subcommand("crossval", "grouped k-fold cross-validation");
  add_common(cv_cmd, common);
  cv_cmd->add_option("--dataset", dataset);

  auto *eval_cmd = app.add_subcommand("eval", "evaluate trained parameters");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--dataset", dataset);
  eval_cmd->add_option("--params", params_path)->required();

  auto *ak_cmd = app.add_subcommand("ablate-k", "window-length sweep");
  add_common(ak_cmd, common);
  ak_cmd->add_option("--dataset", dataset);
  ak_cmd->add_option("--ks", ks, "comma-separated window lengths");

  auto *al_cmd = app.add_subcommand("ablate-lambda", "loss-weight sweep");
  add_common(al_cmd, common);
  al_cmd->add_option("--dataset", dataset);
  al_cmd->add_option("--lambdas", lambdas, "comma-separated weights");

  auto *replay_cmd = app.add_subcommand("replay", "press probabilities to MIDI or text");
  add_common(replay_cmd, common);
  replay_cmd->add_option("--input", input, "CSV time_s,p1..p5")->required();
  replay_cmd->add_option("--rate", rate, "frames per second");
  replay_cmd->add_option("--mode", mode, "piano or typing");

  auto *count_cmd = app.add_subcommand("count-params", "per-layer parameter counts");
  add_common(count_cmd, common, false);
  count_cmd->add_option("--model", model, "SF, MF, CBMF or all");
  count_cmd->add_option("--k", k);
  count_cmd->add_option("--side", side);
  count_cmd->add_option("--width", width);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    if (e.get_exit_code() == 0)
    {
      return app.exit(e);
    }
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try
  {
    if (synth_cmd->parsed())
    {
      run_synth_gen(common, synth);
    }
    else if (extract_cmd->parsed())
    {
      run_extract_config(common, input);
    }
    else if (build_cmd->parsed())
    {
      run_build_dataset(common, input, stride);
    }
    else if (train_cmd->parsed())
    {
      run_train(common, dataset);
    }
    else if (cv_cmd->parsed())
    {
      run_crossval(common, dataset);
    }
    else if (eval_cmd->parsed())
    {
      run_eval(common, dataset, params_path);
    }
    else if (ak_cmd->parsed())
    {
      run_ablate_k(common, dataset, ks);
    }
    else if (al_cmd->parsed())
    {
      run_ablate_lambda(common, dataset, lambdas);
    }
    else if (replay_cmd->parsed())
    {
      run_replay(common, input, rate, mode);
    }
    else if (count_cmd->parsed())
    {
      run_count_params(common, model, k, side, width);
    }
  }
  catch (Error const &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

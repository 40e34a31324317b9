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

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace finemotion::train {
namespace {

using json = nlohmann::json;

constexpr char          kParamMagic[4] = {'F', 'M', 'P', 'S'};
constexpr std::uint32_t kParamVersion  = 1;

template <typename T>
void put(std::ostream &out, T value)
{
  out.write(reinterpret_cast<char const *>(&value), sizeof value);
}

template <typename T>
T get(std::istream &in, std::filesystem::path const &path)
{
  T value{};
  in.read(reinterpret_cast<char *>(&value), sizeof value);
  if (in.gcount() != static_cast<std::streamsize>(sizeof value))
  {
    throw Error("parse", "parameter file '" + path.string() + "' is truncated");
  }
  return value;
}

}  // namespace

void validate(TrainConfig const &c)
{
  auto fail = [](std::string const &msg) { throw Error("config", msg); };
  if (!(c.lambda >= 0.0))
  {
    fail("lambda must be >= 0");
  }
  if (c.epochs < 1 || c.batch_size < 1)
  {
    fail("epochs and batch_size must be >= 1");
  }
  if (c.k < 1 || (c.model == net::ModelKind::kSF && c.k != 1))
  {
    fail("k must be >= 1, and exactly 1 for SF");
  }
  if (c.model == net::ModelKind::kCBMF && c.two_phase && c.phase1_epochs >= c.epochs)
  {
    fail("phase1_epochs must leave at least one joint epoch");
  }
  if (!(c.learning_rate >= 0.0) || !(c.width > 0.0) || c.image_side < 1)
  {
    fail("learning_rate must be >= 0, width > 0 and image_side >= 1");
  }
  if (c.n_folds < 2 || (c.fold >= 0 && static_cast<std::size_t>(c.fold) >= c.n_folds) || c.fold < -1)
  {
    fail("n_folds must be >= 2 and fold in [-1, n_folds)");
  }
  if (c.task != "all" && c.task != "piano" && c.task != "typing")
  {
    fail("task must be piano, typing or all");
  }
  if (c.train_stride < 1 || !(c.threshold > 0.0 && c.threshold < 1.0))
  {
    fail("train_stride must be >= 1 and threshold in (0, 1)");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0))
  {
    fail("dropout must lie in [0, 1)");
  }
  for (int n : c.notes)
  {
    if (n < 0 || n > 127)
    {
      fail("notes must be MIDI note numbers 0..127");
    }
  }
}

std::string to_json(TrainConfig const &c)
{
  json j;
  j["model"]         = net::model_kind_name(c.model);
  j["k"]             = c.k;
  j["image_side"]    = c.image_side;
  j["width"]         = c.width;
  j["batch_size"]    = c.batch_size;
  j["epochs"]        = c.epochs;
  j["phase1_epochs"] = c.phase1_epochs;
  j["two_phase"]     = c.two_phase;
  j["learning_rate"] = c.learning_rate;
  j["lambda"]        = c.lambda;
  j["seed"]          = c.seed;
  j["fold"]          = c.fold;
  j["n_folds"]       = c.n_folds;
  j["task"]          = c.task;
  j["train_stride"]  = c.train_stride;
  j["dataset"]       = c.dataset;
  j["threshold"]     = c.threshold;
  j["dropout"]       = c.dropout;
  j["notes"]         = c.notes;
  j["keys"]          = c.keys;
  return j.dump(2);
}

TrainConfig config_from_json(std::string_view text)
{
  TrainConfig c;
  try
  {
    json const j = json::parse(text);
    if (!j.is_object())
    {
      throw Error("config", "configuration must be a JSON object");
    }
    static std::set<std::string> const known{"model",  "k",         "image_side", "width",     "batch_size",
                                             "epochs", "phase1_epochs", "two_phase", "learning_rate",
                                             "lambda", "seed",      "fold",       "n_folds",   "task",
                                             "train_stride", "dataset", "threshold", "dropout", "notes", "keys"};
    for (auto const &[key, value] : j.items())
    {
      if (!known.count(key))
      {
        throw Error("config", "unknown key '" + key + "'");
      }
    }
    auto read = [&](char const *key, auto &field) {
      if (j.contains(key))
      {
        j.at(key).get_to(field);
      }
    };
    if (j.contains("model"))
    {
      c.model = net::parse_model_kind(j.at("model").get<std::string>());
    }
    read("k", c.k);
    read("image_side", c.image_side);
    read("width", c.width);
    read("batch_size", c.batch_size);
    read("epochs", c.epochs);
    read("phase1_epochs", c.phase1_epochs);
    read("two_phase", c.two_phase);
    read("learning_rate", c.learning_rate);
    read("lambda", c.lambda);
    read("seed", c.seed);
    read("fold", c.fold);
    read("n_folds", c.n_folds);
    read("task", c.task);
    read("train_stride", c.train_stride);
    read("dataset", c.dataset);
    read("threshold", c.threshold);
    read("dropout", c.dropout);
    read("notes", c.notes);
    read("keys", c.keys);
  }
  catch (json::exception const &e)
  {
    throw Error("config", std::string("malformed configuration: ") + e.what());
  }
  validate(c);
  return c;
}

TrainConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("io", "cannot open configuration '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

net::ModelSpec model_spec(TrainConfig const &c)
{
  net::ModelSpec spec = net::build_model(c.model, c.model == net::ModelKind::kSF ? 1 : c.k, c.image_side, c.width);
  for (auto &layer : spec.encoder)
  {
    if (layer.kind == net::LayerKind::kDropout)
    {
      layer.rate = c.dropout;
    }
  }
  return spec;
}

WindowSet select_task(data::Dataset const &dataset, std::string const &task, std::size_t k)
{
  WindowSet set{&dataset, {}};
  for (std::size_t s = 0; s < dataset.sequences.size(); ++s)
  {
    auto const &seq = dataset.sequences[s];
    if (task == "all" || data::task_name(seq.task) == task)
    {
      auto const w = data::build_windows(seq.size(), s, k == 0 ? dataset.k : k, dataset.stride);
      set.windows.insert(set.windows.end(), w.begin(), w.end());
    }
  }
  return set;
}

void save_params(ParamStore const &params, std::filesystem::path const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("io", "cannot open '" + path.string() + "' for writing");
  }
  out.write(kParamMagic, 4);
  put(out, kParamVersion);
  put(out, static_cast<std::uint32_t>(params.size()));
  for (auto const &e : params.entries())
  {
    put(out, static_cast<std::uint16_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put(out, static_cast<std::uint32_t>(e.value.rank()));
    for (auto d : e.value.shape())
    {
      put(out, static_cast<std::uint32_t>(d));
    }
    out.write(reinterpret_cast<char const *>(e.value.data()),
              static_cast<std::streamsize>(e.value.size() * sizeof(double)));
  }
  if (!out)
  {
    throw Error("io", "failed writing '" + path.string() + "'");
  }
}

ParamStore load_params(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("io", "cannot open '" + path.string() + "' for reading");
  }
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kParamMagic, 4) != 0)
  {
    throw Error("parse", "parameter file '" + path.string() + "': bad magic at byte 0");
  }
  if (get<std::uint32_t>(in, path) != kParamVersion)
  {
    throw Error("parse", "parameter file '" + path.string() + "': unsupported version at byte 4");
  }
  ParamStore    store;
  auto const    n = get<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < n; ++i)
  {
    std::string name(get<std::uint16_t>(in, path), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    Shape shape(get<std::uint32_t>(in, path));
    for (auto &d : shape)
    {
      d = get<std::uint32_t>(in, path);
    }
    Tensor t(shape);
    in.read(reinterpret_cast<char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(double)))
    {
      throw Error("parse", "parameter file '" + path.string() + "': values of '" + name + "' truncated");
    }
    store.add(std::move(name), std::move(t));
  }
  return store;
}

}  // namespace finemotion::train

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

#include "finemotion/param_store.hpp"

#include "finemotion/error.hpp"

#include <cmath>
#include <cstring>

namespace finemotion {

Tensor &ParamStore::add(std::string name, Tensor initial)
{
  if (contains(name))
  {
    throw Error("param", "duplicate parameter '" + name + "'");
  }
  Shape const shape = initial.shape();
  entries_.push_back(Entry{std::move(name), std::move(initial), Tensor(shape), Tensor(shape)});
  return entries_.back().value;
}

bool ParamStore::contains(std::string_view name) const
{
  for (auto const &e : entries_)
  {
    if (e.name == name)
    {
      return true;
    }
  }
  return false;
}

std::size_t ParamStore::index_of(std::string_view name) const
{
  for (std::size_t i = 0; i < entries_.size(); ++i)
  {
    if (entries_[i].name == name)
    {
      return i;
    }
  }
  throw Error("param", "unknown parameter '" + std::string(name) + "'");
}

Tensor &ParamStore::get(std::string_view name)
{
  return entries_[index_of(name)].value;
}

Tensor const &ParamStore::get(std::string_view name) const
{
  return entries_[index_of(name)].value;
}

std::size_t ParamStore::scalar_count() const noexcept
{
  std::size_t total = 0;
  for (auto const &e : entries_)
  {
    total += e.value.size();
  }
  return total;
}

void ParamStore::reset_optimizer_state()
{
  for (auto &e : entries_)
  {
    e.first_moment.fill(0.0);
    e.second_moment.fill(0.0);
  }
  step_ = 0;
}

std::vector<Tensor> ParamStore::zero_gradients() const
{
  std::vector<Tensor> grads;
  grads.reserve(entries_.size());
  for (auto const &e : entries_)
  {
    grads.emplace_back(e.value.shape());
  }
  return grads;
}

std::uint64_t ParamStore::checksum(std::string_view prefix) const
{
  std::uint64_t hash = 1469598103934665603ULL;
  for (auto const &e : entries_)
  {
    if (!e.name.starts_with(prefix))
    {
      continue;
    }
    auto const *bytes = reinterpret_cast<unsigned char const *>(e.value.data());
    for (std::size_t i = 0; i < e.value.size() * sizeof(double); ++i)
    {
      hash ^= bytes[i];
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

void adam_step(ParamStore &store, std::span<Tensor const> gradients, AdamOptions const &options,
               std::span<bool const> active)
{
  auto &entries = store.entries();
  if (gradients.size() != entries.size())
  {
    throw Error("shape", "adam_step got " + std::to_string(gradients.size()) + " gradients for " +
                             std::to_string(entries.size()) + " parameters");
  }
  if (!active.empty() && active.size() != entries.size())
  {
    throw Error("shape", "adam_step activity mask has the wrong length");
  }
  for (std::size_t i = 0; i < entries.size(); ++i)
  {
    if (gradients[i].shape() != entries[i].value.shape())
    {
      throw Error("shape", "gradient " + gradients[i].shape_string() + " does not match parameter '" +
                               entries[i].name + "' " + entries[i].value.shape_string());
    }
  }

  store.advance_step();
  auto const   t     = static_cast<double>(store.step());
  double const corr1 = 1.0 - std::pow(options.beta1, t);
  double const corr2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < entries.size(); ++i)
  {
    if (!active.empty() && !active[i])
    {
      continue;
    }
    auto &e = entries[i];
    for (std::size_t j = 0; j < e.value.size(); ++j)
    {
      double const g     = gradients[i][j];
      double &m          = e.first_moment[j];
      double &v          = e.second_moment[j];
      m                  = options.beta1 * m + (1.0 - options.beta1) * g;
      v                  = options.beta2 * v + (1.0 - options.beta2) * g * g;
      double const m_hat = m / corr1;
      double const v_hat = v / corr2;
      e.value[j] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

}  // namespace finemotion

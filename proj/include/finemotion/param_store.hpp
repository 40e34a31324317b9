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

#include "finemotion/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace finemotion {

/// Named parameter tensors plus their Adam moment accumulators.
class ParamStore
{
public:
  struct Entry
  {
    std::string name;
    Tensor      value;
    Tensor      first_moment;
    Tensor      second_moment;
  };

  /// Registers a parameter; names must be unique.
  Tensor &add(std::string name, Tensor initial);

  bool                 contains(std::string_view name) const;
  std::size_t          index_of(std::string_view name) const;
  Tensor              &get(std::string_view name);
  Tensor const        &get(std::string_view name) const;
  std::size_t          size() const noexcept
  {
    return entries_.size();
  }
  std::size_t          scalar_count() const noexcept;
  std::vector<Entry>       &entries() noexcept
  {
    return entries_;
  }
  std::vector<Entry> const &entries() const noexcept
  {
    return entries_;
  }

  std::uint64_t step() const noexcept
  {
    return step_;
  }
  void advance_step() noexcept
  {
    ++step_;
  }
  /// Zeroes both moments and the step counter.
  void reset_optimizer_state();

  /// Zero tensors shaped like each parameter, in entry order.
  std::vector<Tensor> zero_gradients() const;

  /// FNV-1a over the raw bytes of every parameter whose name starts with
  /// `prefix` (all parameters when empty).
  std::uint64_t checksum(std::string_view prefix = {}) const;

private:
  std::vector<Entry> entries_;
  std::uint64_t      step_ = 0;
};

struct AdamOptions
{
  double learning_rate = 0.001;
  double beta1         = 0.9;
  double beta2         = 0.999;
  double epsilon       = 1e-8;
};

/// One Adam update with bias-corrected moments. `active`, when non-empty,
/// selects which entries are updated; inactive entries keep their value and
/// moments. The step counter always advances by one.
void adam_step(ParamStore &store, std::span<Tensor const> gradients, AdamOptions const &options,
               std::span<bool const> active = {});

}  // namespace finemotion

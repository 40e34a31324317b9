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

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace finemotion {

using Shape = std::vector<std::size_t>;

/// Cache-line aligned storage. Vectorized reductions pick their summation
/// order from the start address, so a fixed alignment keeps results
/// bit-identical from run to run.
template <typename T>
struct AlignedAllocator
{
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(AlignedAllocator<U> const &) noexcept
  {}

  T *allocate(std::size_t n)
  {
    return static_cast<T *>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T *p, std::size_t) noexcept
  {
    ::operator delete(p, kAlignment);
  }

  friend bool operator==(AlignedAllocator const &, AlignedAllocator const &) noexcept
  {
    return true;
  }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

std::size_t shape_volume(Shape const &shape);
std::string shape_string(Shape const &shape);

/// Dense row-major tensor of doubles.
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  Shape const &shape() const noexcept
  {
    return shape_;
  }
  std::size_t rank() const noexcept
  {
    return shape_.size();
  }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept
  {
    return values_.size();
  }
  bool empty() const noexcept
  {
    return values_.empty();
  }

  double *data() noexcept
  {
    return values_.data();
  }
  double const *data() const noexcept
  {
    return values_.data();
  }
  std::span<double> values() noexcept
  {
    return values_;
  }
  std::span<double const> values() const noexcept
  {
    return values_;
  }
  double &operator[](std::size_t i) noexcept
  {
    return values_[i];
  }
  double operator[](std::size_t i) const noexcept
  {
    return values_[i];
  }

  /// Same values, new shape of equal volume.
  Tensor reshaped(Shape shape) const;
  void fill(double value);
  bool all_finite() const noexcept;
  std::string shape_string() const
  {
    return finemotion::shape_string(shape_);
  }

  friend bool operator==(Tensor const &, Tensor const &) = default;

private:
  Shape               shape_;
  AlignedVector       values_;
};

}  // namespace finemotion

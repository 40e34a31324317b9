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

#include "finemotion/tensor.hpp"

#include "finemotion/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace finemotion {

std::size_t shape_volume(Shape const &shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(Shape const &shape)
{
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i)
  {
    if (i > 0)
    {
      out += "x";
    }
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
  : shape_(std::move(shape))
  , values_(shape_volume(shape_), fill)
{
  for (auto extent : shape_)
  {
    if (extent == 0)
    {
      throw Error("shape", "tensor extents must be positive, got " + finemotion::shape_string(shape_));
    }
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
  : shape_(std::move(shape))
  , values_(values.begin(), values.end())
{
  if (shape_volume(shape_) != values_.size())
  {
    throw Error("shape", "tensor of shape " + finemotion::shape_string(shape_) + " cannot hold " +
                             std::to_string(values_.size()) + " values");
  }
}

std::size_t Tensor::dim(std::size_t axis) const
{
  if (axis >= shape_.size())
  {
    throw Error("shape", "axis " + std::to_string(axis) + " out of range for " + shape_string());
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const
{
  if (shape_volume(shape) != values_.size())
  {
    throw Error("shape", "cannot reshape " + shape_string() + " to " + finemotion::shape_string(shape));
  }
  Tensor out;
  out.shape_  = std::move(shape);
  out.values_ = values_;
  return out;
}

void Tensor::fill(double value)
{
  std::fill(values_.begin(), values_.end(), value);
}

bool Tensor::all_finite() const noexcept
{
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace finemotion

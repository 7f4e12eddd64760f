// Copyright 2026 The InSPO Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "inspo/error.hpp"

namespace inspo {

// Dense row-major tensor of doubles. Only ranks 2 and 3 are used in practice;
// the last index is always contiguous so `row`/`slice` hand out spans.
template <std::size_t Rank>
class Tensor {
  static_assert(Rank >= 1 && Rank <= 3);

 public:
  using Shape = std::array<std::size_t, Rank>;

  Tensor() { shape_.fill(0); }

  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(shape), data_(element_count(shape), fill) {}

  Tensor(Shape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {
    require(data_.size() == element_count(shape_),
            "tensor data size does not match its shape");
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  template <typename... Index>
    requires(sizeof...(Index) == Rank)
  double& operator()(Index... idx) noexcept {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  template <typename... Index>
    requires(sizeof...(Index) == Rank)
  double operator()(Index... idx) const noexcept {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  // Contiguous run of the last axis.
  template <typename... Index>
    requires(sizeof...(Index) == Rank - 1)
  std::span<double> row(Index... idx) noexcept {
    const std::size_t n = shape_[Rank - 1];
    std::array<std::size_t, Rank> full{static_cast<std::size_t>(idx)..., 0};
    return {data_.data() + offset(full), n};
  }

  template <typename... Index>
    requires(sizeof...(Index) == Rank - 1)
  std::span<const double> row(Index... idx) const noexcept {
    const std::size_t n = shape_[Rank - 1];
    std::array<std::size_t, Rank> full{static_cast<std::size_t>(idx)..., 0};
    return {data_.data() + offset(full), n};
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

 private:
  std::size_t offset(const std::array<std::size_t, Rank>& idx) const noexcept {
    std::size_t off = 0;
    for (std::size_t a = 0; a < Rank; ++a) off = off * shape_[a] + idx[a];
    return off;
  }

  Shape shape_;
  std::vector<double> data_;
};

using Matrix = Tensor<2>;
using Cube = Tensor<3>;

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "max_abs_diff: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace inspo

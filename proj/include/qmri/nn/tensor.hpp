// Copyright 2026 The qmri Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/rng.hpp"

namespace qmri::nn {

/// N x C x H x W extents.
struct Shape {
    int n = 1;
    int c = 1;
    int h = 1;
    int w = 1;

    std::size_t size() const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
               static_cast<std::size_t>(w);
    }
    std::size_t plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
    bool operator==(const Shape&) const = default;

    std::string str() const {
        return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
};

/// Dense row-major NCHW array.
template <typename T>
class Tensor {
  public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{0}) : shape_(shape) {
        if (shape.n < 1 || shape.c < 1 || shape.h < 1 || shape.w < 1) {
            throw InvalidArgument("tensor dims must all be >= 1, got " + shape.str());
        }
        data_.assign(shape.size(), fill);
    }
    Tensor(Shape shape, std::vector<T> values) : Tensor(shape) {
        if (values.size() != shape.size()) throw InvalidArgument("tensor value count mismatch for " + shape.str());
        data_ = std::move(values);
    }

    const Shape& shape() const { return shape_; }
    int n() const { return shape_.n; }
    int c() const { return shape_.c; }
    int h() const { return shape_.h; }
    int w() const { return shape_.w; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> span() { return data_; }
    std::span<const T> span() const { return data_; }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    T& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
    const T& at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    /// Start of the (n, c) plane.
    T* plane(int n, int c) { return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane(); }
    const T* plane(int n, int c) const {
        return data_.data() + (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane();
    }
    /// Start of sample n.
    T* sample(int n) { return plane(n, 0); }
    const T* sample(int n) const { return plane(n, 0); }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        std::transform(data_.begin(), data_.end(), out.data(), [](T v) { return static_cast<U>(v); });
        return out;
    }

    bool operator==(const Tensor&) const = default;

  private:
    std::size_t index(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }

    Shape shape_{0, 0, 0, 0};
    std::vector<T> data_;
};

template <typename T>
Tensor<T> randn(Shape shape, Rng& rng, double stddev = 1.0) {
    Tensor<T> t(shape);
    for (auto& v : t.values()) v = static_cast<T>(stddev * normal01(rng));
    return t;
}

template <typename T>
Tensor<T> rand_uniform(Shape shape, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Tensor<T> t(shape);
    for (auto& v : t.values()) v = static_cast<T>(uniform(rng, lo, hi));
    return t;
}

template <typename T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
    if (!(a.shape() == b.shape())) throw InvalidArgument("dot of mismatched tensors");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

}  // namespace qmri::nn

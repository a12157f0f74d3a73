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

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qmri/errors.hpp"

namespace qmri {

using Complex = std::complex<double>;

/// Dense row-major 2-D grid. Image is the real instantiation, ComplexImage the complex one.
template <typename T>
struct Grid {
    int height = 0;
    int width = 0;
    std::vector<T> values;

    Grid() = default;
    Grid(int h, int w, T fill = T{}) : height(h), width(w), values(checked_size(h, w), fill) {}
    Grid(int h, int w, std::vector<T> v) : height(h), width(w), values(std::move(v)) {
        if (values.size() != checked_size(h, w)) {
            throw InvalidArgument("grid value count does not match " + std::to_string(h) + "x" +
                                  std::to_string(w));
        }
    }

    T& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
    const T& operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return values.size(); }
    bool same_shape(const Grid& o) const { return height == o.height && width == o.width; }

    bool operator==(const Grid&) const = default;

  private:
    static std::size_t checked_size(int h, int w) {
        if (h < 0 || w < 0) {
            throw InvalidArgument("negative grid dimension");
        }
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
};

using Image = Grid<double>;
using ComplexImage = Grid<Complex>;

}  // namespace qmri

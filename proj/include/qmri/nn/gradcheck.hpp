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

// Central finite-difference checks of analytic gradients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qmri/rng.hpp"

namespace qmri::nn {

/// A contiguous block of inputs and the analytic dLoss/dInput computed for them.
template <typename T>
struct GradBlock {
    std::string name;
    std::span<T> values;
    std::vector<double> analytic;
};

struct BlockReport {
    std::string name;
    std::size_t checked = 0;
    /// max_i |analytic_i - numeric_i| / max(max_i |analytic_i|, max_i |numeric_i|, floor), where
    /// floor also covers relative_floor times the largest analytic entry over all blocks.
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<BlockReport> blocks;
    double tolerance = 1e-4;

    double worst() const {
        double w = 0.0;
        for (const auto& b : blocks) w = std::max(w, b.max_rel_error);
        return w;
    }
    bool passed() const { return worst() < tolerance; }
};

struct GradCheckOptions {
    double epsilon = 1e-5;
    double tolerance = 1e-4;
    /// 0 checks every coordinate; otherwise a seeded random subset per block.
    std::size_t max_per_block = 0;
    std::uint64_t seed = 0;
    /// Denominator floor, so blocks whose true gradient is zero (a bias feeding
    /// batch norm, say) compare difference-quotient noise against something sane.
    double floor = 1e-6;
    /// Same idea, scaled by the largest analytic gradient anywhere in the check.
    double relative_floor = 1e-3;
};

/// `loss` must be a pure function of the block values (the check perturbs them in place).
template <typename T>
GradCheckReport gradient_check(const std::function<double()>& loss, std::vector<GradBlock<T>>& blocks,
                               const GradCheckOptions& opt = {}) {
    GradCheckReport report;
    report.tolerance = opt.tolerance;
    Rng rng(opt.seed);
    double global = 0.0;
    for (const auto& block : blocks)
        for (const double g : block.analytic) global = std::max(global, std::abs(g));
    const double floor = std::max(opt.floor, opt.relative_floor * global);
    for (auto& block : blocks) {
        std::vector<std::size_t> idx(block.values.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (opt.max_per_block != 0 && idx.size() > opt.max_per_block) {
            for (std::size_t i = 0; i < opt.max_per_block; ++i) {
                std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
            }
            idx.resize(opt.max_per_block);
        }
        double max_diff = 0.0, scale = 0.0;
        for (const std::size_t i : idx) {
            const T saved = block.values[i];
            block.values[i] = static_cast<T>(saved + opt.epsilon);
            const double up = loss();
            block.values[i] = static_cast<T>(saved - opt.epsilon);
            const double down = loss();
            block.values[i] = saved;
            const double numeric = (up - down) / (2.0 * opt.epsilon);
            const double analytic = block.analytic[i];
            max_diff = std::max(max_diff, std::abs(analytic - numeric));
            scale = std::max({scale, std::abs(analytic), std::abs(numeric)});
        }
        report.blocks.push_back({block.name, idx.size(), max_diff / std::max(scale, floor)});
    }
    return report;
}

}  // namespace qmri::nn

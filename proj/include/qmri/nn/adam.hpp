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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/nn/layers.hpp"

namespace qmri::nn {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moments are kept in double regardless of the parameter precision.
struct AdamState {
    AdamHyper hyper;
    std::int64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

template <typename T>
AdamState make_adam_state(std::span<Parameter<T>* const> params, AdamHyper hyper = {}) {
    AdamState s;
    s.hyper = hyper;
    for (const auto* p : params) {
        s.first_moment.emplace_back(p->value.size(), 0.0);
        s.second_moment.emplace_back(p->value.size(), 0.0);
    }
    return s;
}

/// One bias-corrected Adam update of every parameter from its accumulated gradient.
template <typename T>
void adam_step(std::span<Parameter<T>* const> params, AdamState& state) {
    if (state.first_moment.size() != params.size()) {
        throw InvalidArgument("adam_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                              " parameters, got " + std::to_string(params.size()));
    }
    const auto& h = state.hyper;
    ++state.step;
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        if (m.size() != p.value.size() || p.grad.size() != p.value.size()) {
            throw InvalidArgument("adam_step: shape mismatch for " + p.name);
        }
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double g = p.grad[i];
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p.value[i] = static_cast<T>(p.value[i] - h.lr * mhat / (std::sqrt(vhat) + h.eps));
        }
    }
}

}  // namespace qmri::nn

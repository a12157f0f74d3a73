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

// Parameter-free quantum convolution: disjoint 2x2 patches (stride 2), each
// pixel angle-encoded as RY(p) RZ(p^2) on its own qubit, one circuit run per
// patch, outputs assembled at half resolution.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/image.hpp"
#include "qmri/qsim.hpp"

namespace qmri::quanv {

/// Channel-major feature planes: values[(c * height + r) * width + col].
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    double& at(int c, int r, int col) { return values[(static_cast<std::size_t>(c) * height + r) * width + col]; }
    double at(int c, int r, int col) const {
        return values[(static_cast<std::size_t>(c) * height + r) * width + col];
    }

    bool operator==(const FeatureMap&) const = default;
};

using PatchPixels = std::array<double, 4>;
using PatchAngles = std::array<qsim::AnglePair, 4>;

inline PatchAngles encode_patch(const PatchPixels& pixels) {
    PatchAngles angles{};
    for (std::size_t n = 0; n < 4; ++n) {
        angles[n] = {pixels[n], pixels[n] * pixels[n]};
    }
    return angles;
}

namespace detail {

inline void check_input(const Image& image) {
    if (image.height < 2 || image.width < 2) {
        throw InvalidArgument("quanvolution needs an image of at least 2x2, got " +
                              std::to_string(image.height) + "x" + std::to_string(image.width));
    }
}

// Row-major qubit assignment within the patch: TL, TR, BL, BR.
inline PatchPixels patch_at(const Image& image, int pr, int pc) {
    const int r = 2 * pr;
    const int c = 2 * pc;
    return {image(r, c), image(r, c + 1), image(r + 1, c), image(r + 1, c + 1)};
}

inline FeatureMap empty_map(const Image& image, const qsim::CircuitConfig& config) {
    FeatureMap out;
    out.channels = config.output_channels();
    out.height = image.height / 2;
    out.width = image.width / 2;
    out.values.assign(static_cast<std::size_t>(out.channels) * out.height * out.width, 0.0);
    return out;
}

inline void store(FeatureMap& out, int pr, int pc, const std::vector<double>& readout) {
    for (int ch = 0; ch < out.channels; ++ch) out.at(ch, pr, pc) = readout[static_cast<std::size_t>(ch)];
}

}  // namespace detail

inline std::vector<double> run_patch(const PatchPixels& pixels, const qsim::CircuitConfig& config) {
    const auto angles = encode_patch(pixels);
    return qsim::run_patch_circuit(angles, config);
}

/// Exact quanvolution. Trailing odd row/column is dropped.
inline FeatureMap quanvolve(const Image& image, const qsim::CircuitConfig& config = {}) {
    detail::check_input(image);
    config.validate();
    FeatureMap out = detail::empty_map(image, config);
    for (int pr = 0; pr < out.height; ++pr) {
        for (int pc = 0; pc < out.width; ++pc) {
            detail::store(out, pr, pc, run_patch(detail::patch_at(image, pr, pc), config));
        }
    }
    return out;
}

/// Memo table for quanvolution over a uniform pixel grid. Not thread-safe;
/// use one instance per worker.
class QuanvCache {
  public:
    QuanvCache(int levels, qsim::CircuitConfig config) : levels_(levels), config_(config) {
        if (levels < 2) {
            throw InvalidArgument("quantization_levels must be >= 2, got " + std::to_string(levels));
        }
        if (levels > 65536) {
            throw InvalidArgument("quantization_levels must be <= 65536");
        }
        config_.validate();
    }

    int levels() const { return levels_; }
    const qsim::CircuitConfig& config() const { return config_; }
    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }
    std::size_t size() const { return table_.size(); }

    /// Nearest grid index of p in [0,1] (values outside are clamped).
    int level_of(double p) const {
        const double clamped = std::fmin(1.0, std::fmax(0.0, p));
        return static_cast<int>(std::lround(clamped * (levels_ - 1)));
    }

    double value_of(int level) const { return static_cast<double>(level) / (levels_ - 1); }

    /// Quantizes pixels to the grid and returns the memoized readout.
    const std::vector<double>& lookup(const PatchPixels& pixels) {
        std::array<int, 4> idx{};
        std::uint64_t key = 0;
        for (std::size_t n = 0; n < 4; ++n) {
            idx[n] = level_of(pixels[n]);
            key = (key << 16) | static_cast<std::uint64_t>(idx[n]);
        }
        auto it = table_.find(key);
        if (it != table_.end()) {
            ++hits_;
            return it->second;
        }
        ++misses_;
        PatchPixels q{};
        for (std::size_t n = 0; n < 4; ++n) q[n] = value_of(idx[n]);
        return table_.emplace(key, run_patch(q, config_)).first->second;
    }

  private:
    int levels_;
    qsim::CircuitConfig config_;
    std::unordered_map<std::uint64_t, std::vector<double>> table_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/// Quanvolution of the image quantized to the cache's grid. Equals quanvolve()
/// of the quantized image exactly.
inline FeatureMap quanvolve_cached(const Image& image, QuanvCache& cache) {
    detail::check_input(image);
    FeatureMap out = detail::empty_map(image, cache.config());
    for (int pr = 0; pr < out.height; ++pr) {
        for (int pc = 0; pc < out.width; ++pc) {
            detail::store(out, pr, pc, cache.lookup(detail::patch_at(image, pr, pc)));
        }
    }
    return out;
}

inline FeatureMap quanvolve_cached(const Image& image, const qsim::CircuitConfig& config, int levels) {
    QuanvCache cache(levels, config);
    return quanvolve_cached(image, cache);
}

/// Pixelwise projection onto the uniform grid used by QuanvCache.
inline Image quantize(const Image& image, int levels) {
    QuanvCache grid(levels, {});
    Image out = image;
    for (auto& v : out.values) v = grid.value_of(grid.level_of(v));
    return out;
}

/// Upper bound on |readout(p) - readout(p')| when every pixel moves by at most
/// half a grid step. Each rotation's <Z> derivative is bounded by 1 in its
/// angle; a pixel p drives RY(s p) and RZ(s p^2), so d/dp <= s + 2 s^2 on [0,1].
inline double quantization_error_bound(int levels, double angle_scale = 1.0) {
    const double half_step = 0.5 / (levels - 1);
    return 4.0 * (angle_scale + 2.0 * angle_scale * angle_scale) * half_step;
}

}  // namespace qmri::quanv

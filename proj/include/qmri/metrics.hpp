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

// Full-reference image quality: MSE, PSNR and Gaussian-window SSIM.

#include <cmath>
#include <string>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/image.hpp"

namespace qmri::metrics {

/// Upper clamp on PSNR; identical images would otherwise diverge.
inline constexpr double kPsnrCap = 99.0;

inline void check_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InvalidArgument(std::string(what) + ": " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                              " vs " + std::to_string(b.height) + "x" + std::to_string(b.width));
    }
}

inline double mse(const Image& prediction, const Image& target) {
    check_same_shape(prediction, target, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction.values[i] - target.values[i];
        s += d * d;
    }
    return s / static_cast<double>(prediction.size());
}

/// 10 log10(range^2 / mse), capped at kPsnrCap when mse is zero.
inline double psnr_from_mse(double mse_value, double data_range = 1.0) {
    if (mse_value <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(data_range * data_range / mse_value));
}

inline double psnr(const Image& prediction, const Image& target, double data_range = 1.0) {
    return psnr_from_mse(mse(prediction, target), data_range);
}

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double data_range = 1.0;
};

/// Normalized separable Gaussian taps.
inline std::vector<double> gaussian_taps(int size, double sigma) {
    std::vector<double> taps(static_cast<std::size_t>(size));
    const double center = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - center;
        taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

namespace detail {

// Separable 'valid' filtering: output is (H - k + 1) x (W - k + 1).
inline Image filter_valid(const Image& x, const std::vector<double>& taps) {
    const int k = static_cast<int>(taps.size());
    const int oh = x.height - k + 1;
    const int ow = x.width - k + 1;
    Image rows(x.height, ow);
    for (int r = 0; r < x.height; ++r) {
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int t = 0; t < k; ++t) s += taps[static_cast<std::size_t>(t)] * x(r, c + t);
            rows(r, c) = s;
        }
    }
    Image out(oh, ow);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int t = 0; t < k; ++t) s += taps[static_cast<std::size_t>(t)] * rows(r + t, c);
            out(r, c) = s;
        }
    }
    return out;
}

inline Image product(const Image& a, const Image& b) {
    Image out(a.height, a.width);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

}  // namespace detail

/// Local SSIM map over every fully contained window position.
inline Image ssim_map(const Image& prediction, const Image& target, const SsimParams& p = {}) {
    check_same_shape(prediction, target, "ssim");
    if (prediction.height < p.window || prediction.width < p.window) {
        throw InvalidArgument("ssim: image " + std::to_string(prediction.height) + "x" +
                              std::to_string(prediction.width) + " is smaller than the " + std::to_string(p.window) +
                              "x" + std::to_string(p.window) + " window");
    }
    const auto taps = gaussian_taps(p.window, p.sigma);
    const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
    const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
    const Image mu_x = detail::filter_valid(prediction, taps);
    const Image mu_y = detail::filter_valid(target, taps);
    const Image e_xx = detail::filter_valid(detail::product(prediction, prediction), taps);
    const Image e_yy = detail::filter_valid(detail::product(target, target), taps);
    const Image e_xy = detail::filter_valid(detail::product(prediction, target), taps);
    Image out(mu_x.height, mu_x.width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double mx = mu_x.values[i];
        const double my = mu_y.values[i];
        const double vx = e_xx.values[i] - mx * mx;
        const double vy = e_yy.values[i] - my * my;
        // The textbook ratio rewritten as (1 - p)(1 - q). Both p and q are built from
        // differences that vanish exactly when x == y (vx - cxy = (e_xx - e_xy) - mx d),
        // so ssim(x, x) is exactly 1 whatever FMA contraction the compiler applies.
        const double d = mx - my;
        const double sx = (e_xx.values[i] - e_xy.values[i]) - mx * d;
        const double sy = (e_yy.values[i] - e_xy.values[i]) + my * d;
        const double lum = 1.0 - (d * d) / (mx * mx + my * my + c1);
        const double cs = 1.0 - (sx + sy) / (vx + vy + c2);
        out.values[i] = lum * cs;
    }
    return out;
}

inline double ssim(const Image& prediction, const Image& target, const SsimParams& p = {}) {
    const Image map = ssim_map(prediction, target, p);
    double s = 0.0;
    for (const double v : map.values) s += v;
    return s / static_cast<double>(map.size());
}

}  // namespace qmri::metrics

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

#include "qmri/metrics.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "qmri/rng.hpp"

using namespace qmri;
using namespace qmri::metrics;

namespace {

Image random_image(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    Image img(h, w);
    for (auto& v : img.values) v = uniform01(rng);
    return img;
}

}  // namespace

TEST(metrics, mse_and_psnr_examples) {
    const Image a(4, 4, 0.5), b(4, 4, 0.6);
    EXPECT_NEAR(mse(a, b), 0.01, 1e-15);
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-10);
    EXPECT_NEAR(psnr_from_mse(0.00087), 30.6048, 1e-4);
    EXPECT_EQ(psnr_from_mse(0.0), kPsnrCap);
    EXPECT_EQ(psnr(a, a), kPsnrCap);
    EXPECT_EQ(psnr_from_mse(1e-60), kPsnrCap);
    EXPECT_THROW(mse(a, Image(4, 5)), InvalidArgument);
}

TEST(metrics, psnr_scale_invariance) {
    const Image x = random_image(16, 16, 1);
    const Image y = random_image(16, 16, 2);
    Image x3 = x, y3 = y;
    for (auto& v : x3.values) v *= 3.0;
    for (auto& v : y3.values) v *= 3.0;
    EXPECT_NEAR(psnr(x, y, 1.0), psnr(x3, y3, 3.0), 1e-10);
}

TEST(metrics, ssim_identity_is_exactly_one) {
    for (std::uint64_t s = 0; s < 4; ++s) {
        const Image x = random_image(32, 24, s);
        EXPECT_EQ(ssim(x, x), 1.0);
    }
    const Image flat(16, 16, 0.3);
    EXPECT_EQ(ssim(flat, flat), 1.0);
}

TEST(metrics, ssim_is_symmetric_and_bounded) {
    const Image x = random_image(20, 20, 5);
    const Image y = random_image(20, 20, 6);
    EXPECT_NEAR(ssim(x, y), ssim(y, x), 1e-14);
    EXPECT_LE(ssim(x, y), 1.0);
    EXPECT_GE(ssim(x, y), -1.0);
}

TEST(metrics, ssim_checkerboard_inverse_is_negative) {
    Image x(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) x(r, c) = (r + c) % 2;
    Image inv = x;
    for (auto& v : inv.values) v = 1.0 - v;
    EXPECT_LT(ssim(x, inv), 0.0);
}

TEST(metrics, ssim_decreases_with_noise) {
    const Image x = random_image(32, 32, 7);
    Rng rng(8);
    Image noise(32, 32);
    for (auto& v : noise.values) v = normal01(rng);
    double prev = 1.0;
    for (const double sigma : {0.01, 0.03, 0.1, 0.3, 1.0}) {
        Image y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y.values[i] += sigma * noise.values[i];
        const double s = ssim(x, y);
        EXPECT_LT(s, prev) << sigma;
        prev = s;
    }
}

TEST(metrics, ssim_window_properties) {
    const auto taps = gaussian_taps(11, 1.5);
    double sum = 0.0;
    for (const double t : taps) sum += t;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_EQ(taps[0], taps[10]);
    EXPECT_NEAR(taps[5] / taps[4], std::exp(1.0 / (2 * 1.5 * 1.5)), 1e-12);
    EXPECT_EQ(ssim_map(random_image(11, 14, 1), random_image(11, 14, 2)).height, 1);
    EXPECT_THROW(ssim(Image(10, 20), Image(10, 20)), InvalidArgument);
}

TEST(metrics, ssim_constant_images_closed_form) {
    // Flat images: SSIM reduces to the luminance term (2ab + C1) / (a^2 + b^2 + C1).
    const double a = 0.2, b = 0.7, c1 = 0.01 * 0.01;
    EXPECT_NEAR(ssim(Image(16, 16, a), Image(16, 16, b)), (2 * a * b + c1) / (a * a + b * b + c1), 1e-12);
}

TEST(metrics, ssim_matches_direct_window_oracle) {
    // Non-separable 2-D Gaussian window, textbook ratio, evaluated per position.
    const Image x = random_image(15, 13, 31);
    Image y = x;
    Rng rng(32);
    for (auto& v : y.values) v = 0.7 * v + 0.2 * uniform01(rng);
    const int k = 11;
    double w[11][11], total = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double di = i - 5, dj = j - 5;
            w[i][j] = std::exp(-(di * di + dj * dj) / (2 * 1.5 * 1.5));
            total += w[i][j];
        }
    const double c1 = 1e-4, c2 = 9e-4;
    double sum = 0.0;
    int count = 0;
    for (int r = 0; r + k <= x.height; ++r) {
        for (int c = 0; c + k <= x.width; ++c) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) {
                    const double g = w[i][j] / total, a = x(r + i, c + j), b = y(r + i, c + j);
                    mx += g * a;
                    my += g * b;
                    xx += g * a * a;
                    yy += g * b * b;
                    xy += g * a * b;
                }
            const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
            sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    EXPECT_NEAR(ssim(x, y), sum / count, 1e-12);
}

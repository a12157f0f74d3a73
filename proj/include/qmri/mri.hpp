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
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/image.hpp"
#include "qmri/rng.hpp"

namespace qmri::mri {

namespace detail {

// In-place iterative radix-2 DFT, sign -1 forward, +1 inverse, unnormalized.
inline void fft1d(std::span<Complex> data, int sign) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    std::vector<Complex> twiddle(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex t = twiddle[k * stride] * data[start + k + half];
                data[start + k + half] = data[start + k] - t;
                data[start + k] += t;
            }
        }
    }
}

inline void check_pow2(const ComplexImage& x) {
    auto ok = [](int v) { return v >= 1 && std::has_single_bit(static_cast<unsigned>(v)); };
    if (!ok(x.height) || !ok(x.width)) {
        throw InvalidArgument("2-D FFT needs power-of-two dimensions, got " + std::to_string(x.height) + "x" +
                              std::to_string(x.width) + "; zero-pad the image first");
    }
}

// Circular shift by half the extent in both axes. For even (or unit) extents
// fftshift and ifftshift coincide.
inline ComplexImage half_shift(const ComplexImage& x) {
    ComplexImage out(x.height, x.width);
    const int dh = x.height / 2;
    const int dw = x.width / 2;
    for (int r = 0; r < x.height; ++r) {
        for (int c = 0; c < x.width; ++c) out((r + dh) % x.height, (c + dw) % x.width) = x(r, c);
    }
    return out;
}

inline ComplexImage centered_transform(const ComplexImage& x, int sign) {
    check_pow2(x);
    ComplexImage work = half_shift(x);
    for (int r = 0; r < work.height; ++r) {
        fft1d(std::span<Complex>(work.values).subspan(static_cast<std::size_t>(r) * work.width, work.width), sign);
    }
    std::vector<Complex> column(static_cast<std::size_t>(work.height));
    for (int c = 0; c < work.width; ++c) {
        for (int r = 0; r < work.height; ++r) column[static_cast<std::size_t>(r)] = work(r, c);
        fft1d(column, sign);
        for (int r = 0; r < work.height; ++r) work(r, c) = column[static_cast<std::size_t>(r)];
    }
    ComplexImage out = half_shift(work);
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.height) * out.width);
    for (auto& v : out.values) v *= scale;
    return out;
}

}  // namespace detail

/// Centered, unitary 2-D DFT (DC at (H/2, W/2)). Dimensions must be powers of two.
inline ComplexImage fft2c(const ComplexImage& image) { return detail::centered_transform(image, -1); }

/// Inverse (and adjoint) of fft2c.
inline ComplexImage ifft2c(const ComplexImage& kspace) { return detail::centered_transform(kspace, +1); }

inline ComplexImage to_complex(const Image& image) {
    ComplexImage out(image.height, image.width);
    for (std::size_t i = 0; i < image.size(); ++i) out.values[i] = {image.values[i], 0.0};
    return out;
}

inline Image magnitude(const ComplexImage& image) {
    Image out(image.height, image.width);
    for (std::size_t i = 0; i < image.size(); ++i) out.values[i] = std::abs(image.values[i]);
    return out;
}

/// Zero-pads (centered) or center-crops to the requested size.
inline ComplexImage pad_or_crop(const ComplexImage& image, int height, int width) {
    ComplexImage out(height, width);
    const int r0 = (height - image.height) / 2;
    const int c0 = (width - image.width) / 2;
    for (int r = 0; r < image.height; ++r) {
        const int rr = r + r0;
        if (rr < 0 || rr >= height) continue;
        for (int c = 0; c < image.width; ++c) {
            const int cc = c + c0;
            if (cc >= 0 && cc < width) out(rr, cc) = image(r, c);
        }
    }
    return out;
}

/// Per-coil k-space, identical dims across coils.
class KSpaceVolume {
  public:
    KSpaceVolume() = default;
    explicit KSpaceVolume(std::vector<ComplexImage> coils) : coils_(std::move(coils)) {
        for (const auto& c : coils_) {
            if (!c.same_shape(coils_.front())) throw InvalidArgument("k-space coils differ in shape");
        }
    }

    int coil_count() const { return static_cast<int>(coils_.size()); }
    int height() const { return coils_.empty() ? 0 : coils_.front().height; }
    int width() const { return coils_.empty() ? 0 : coils_.front().width; }
    const std::vector<ComplexImage>& coils() const { return coils_; }
    std::vector<ComplexImage>& coils() { return coils_; }
    const ComplexImage& coil(int c) const { return coils_.at(static_cast<std::size_t>(c)); }

    bool operator==(const KSpaceVolume&) const = default;

  private:
    std::vector<ComplexImage> coils_;
};

/// Cartesian line mask: whole rows (phase-encode lines) are kept or dropped.
struct SamplingMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> line_selected;
    double acceleration = 1.0;
    double center_fraction = 0.0;
    std::uint64_t seed = 0;

    int selected_count() const {
        return static_cast<int>(std::count(line_selected.begin(), line_selected.end(), std::uint8_t{1}));
    }
    double achieved_acceleration() const { return static_cast<double>(height) / selected_count(); }
    bool selected(int row) const { return line_selected[static_cast<std::size_t>(row)] != 0; }

    /// Mask as a 0/1 image.
    Image to_image() const {
        Image out(height, width);
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) out(r, c) = selected(r) ? 1.0 : 0.0;
        }
        return out;
    }

    bool operator==(const SamplingMask&) const = default;
};

inline int ceil_count(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

/// Number of always-sampled central lines.
inline int center_line_count(int height, double center_fraction) { return ceil_count(center_fraction * height); }

/// First row of the central band.
inline int center_line_start(int height, int center_lines) { return height / 2 - center_lines / 2; }

/// Default central band: 8% at R <= 2, 4% above.
inline double default_center_fraction(double acceleration) { return acceleration <= 2.0 ? 0.08 : 0.04; }

inline SamplingMask make_cartesian_mask(int height, int width, double acceleration, double center_fraction,
                                        std::uint64_t seed) {
    if (height < 1 || width < 1) throw InvalidArgument("mask dimensions must be positive");
    if (!(acceleration >= 1.0) || !std::isfinite(acceleration)) {
        throw InvalidArgument("acceleration must be >= 1");
    }
    if (!(center_fraction > 0.0 && center_fraction < 1.0)) {
        throw InvalidArgument("center_fraction must lie in (0, 1)");
    }
    const int total = std::min(height, ceil_count(height / acceleration));
    const int center = center_line_count(height, center_fraction);
    if (center > total) {
        throw InvalidArgument("center band of " + std::to_string(center) + " lines exceeds the budget of " +
                              std::to_string(total) + " lines at R=" + std::to_string(acceleration));
    }

    SamplingMask mask;
    mask.height = height;
    mask.width = width;
    mask.acceleration = acceleration;
    mask.center_fraction = center_fraction;
    mask.seed = seed;
    mask.line_selected.assign(static_cast<std::size_t>(height), 0);

    const int start = center_line_start(height, center);
    for (int r = start; r < start + center; ++r) mask.line_selected[static_cast<std::size_t>(r)] = 1;

    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(height - center));
    for (int r = 0; r < height; ++r) {
        if (!mask.selected(r)) pool.push_back(r);
    }
    // Partial Fisher-Yates: the first k pool entries become a uniform k-subset.
    Rng rng(seed);
    const int extra = total - center;
    for (int i = 0; i < extra; ++i) {
        const auto j = static_cast<std::size_t>(i) + uniform_index(rng, pool.size() - static_cast<std::size_t>(i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        mask.line_selected[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
    }
    return mask;
}

inline SamplingMask full_mask(int height, int width) {
    SamplingMask mask;
    mask.height = height;
    mask.width = width;
    mask.line_selected.assign(static_cast<std::size_t>(height), 1);
    return mask;
}

/// f = F_u y: zeroes the unselected lines in every coil.
inline KSpaceVolume apply_mask(const KSpaceVolume& kspace, const SamplingMask& mask) {
    if (kspace.height() != mask.height || kspace.width() != mask.width ||
        mask.line_selected.size() != static_cast<std::size_t>(mask.height)) {
        throw InvalidArgument("mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                              " but k-space is " + std::to_string(kspace.height()) + "x" +
                              std::to_string(kspace.width()));
    }
    KSpaceVolume out = kspace;
    for (auto& coil : out.coils()) {
        for (int r = 0; r < coil.height; ++r) {
            if (mask.selected(r)) continue;
            std::fill_n(coil.values.begin() + static_cast<std::ptrdiff_t>(r) * coil.width, coil.width, Complex{});
        }
    }
    return out;
}

/// z = F_u^* f, per coil.
inline std::vector<ComplexImage> zero_fill_recon(const KSpaceVolume& undersampled) {
    std::vector<ComplexImage> out;
    out.reserve(undersampled.coils().size());
    for (const auto& coil : undersampled.coils()) out.push_back(ifft2c(coil));
    return out;
}

/// Root-sum-of-squares coil combination.
inline Image sos_combine(std::span<const ComplexImage> coil_images) {
    if (coil_images.empty()) throw InvalidArgument("sum-of-squares needs at least one coil");
    const auto& first = coil_images.front();
    Image out(first.height, first.width);
    for (const auto& coil : coil_images) {
        if (!coil.same_shape(first)) throw InvalidArgument("coil images differ in shape");
        for (std::size_t i = 0; i < coil.size(); ++i) out.values[i] += std::norm(coil.values[i]);
    }
    for (auto& v : out.values) v = std::sqrt(v);
    return out;
}

struct Normalized {
    Image image;
    double scale = 1.0;
};

/// Divides by the maximum pixel; multiply by `scale` to invert.
inline Normalized normalize(const Image& image) {
    if (image.values.empty()) throw DegenerateInput("cannot normalize an empty image");
    const double peak = *std::max_element(image.values.begin(), image.values.end());
    if (!(peak > 0.0)) throw DegenerateInput("cannot normalize an image whose maximum is not positive");
    Normalized out{image, peak};
    for (auto& v : out.image.values) v /= peak;
    return out;
}

inline Image scale_image(const Image& image, double factor) {
    Image out = image;
    for (auto& v : out.values) v *= factor;
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic multicoil phantom.

struct PhantomSpec {
    int n_ellipses = 10;
    int coil_count = 4;
    int height = 64;
    int width = 64;
    std::uint64_t seed = 0;
    /// Force |s_c| = 1/sqrt(C) with no phase instead of Gaussian coil bumps.
    bool uniform_sensitivity = false;
};

struct Phantom {
    Image ground_truth;
    KSpaceVolume fully_sampled;
};

/// Random superposed ellipses inside a head-like outer ellipse, scaled to peak 1.
inline Image ellipse_image(const PhantomSpec& spec) {
    if (spec.height < 1 || spec.width < 1) throw InvalidArgument("phantom size must be positive");
    if (spec.n_ellipses < 1) throw InvalidArgument("phantom needs at least one ellipse");
    struct Ellipse {
        double cx, cy, a, b, angle, value;
    };
    Rng rng(spec.seed);
    std::vector<Ellipse> shapes;
    shapes.push_back({uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), uniform(rng, 0.72, 0.85),
                      uniform(rng, 0.80, 0.92), uniform(rng, -0.2, 0.2), uniform(rng, 0.45, 0.65)});
    for (int i = 1; i < spec.n_ellipses; ++i) {
        const double a = uniform(rng, 0.06, 0.35);
        const double b = uniform(rng, 0.06, 0.35);
        const double reach = 0.62 - 0.5 * std::max(a, b);
        shapes.push_back({uniform(rng, -reach, reach), uniform(rng, -reach, reach), a, b,
                          uniform(rng, 0.0, std::numbers::pi), uniform(rng, -0.3, 0.5)});
    }
    Image img(spec.height, spec.width);
    for (int r = 0; r < spec.height; ++r) {
        const double y = 2.0 * (r + 0.5) / spec.height - 1.0;
        for (int c = 0; c < spec.width; ++c) {
            const double x = 2.0 * (c + 0.5) / spec.width - 1.0;
            double v = 0.0;
            for (const auto& e : shapes) {
                const double dx = x - e.cx;
                const double dy = y - e.cy;
                const double u = (dx * std::cos(e.angle) + dy * std::sin(e.angle)) / e.a;
                const double w = (-dx * std::sin(e.angle) + dy * std::cos(e.angle)) / e.b;
                if (u * u + w * w <= 1.0) v += e.value;
            }
            img(r, c) = std::max(0.0, v);
        }
    }
    const double peak = *std::max_element(img.values.begin(), img.values.end());
    if (peak > 0.0) {
        for (auto& v : img.values) v /= peak;
    }
    return img;
}

/// Smooth complex coil sensitivities with unit root-sum-of-squares at every pixel.
inline std::vector<ComplexImage> coil_sensitivities(int coils, int height, int width, bool uniform) {
    if (coils < 1) throw InvalidArgument("coil_count must be >= 1");
    std::vector<ComplexImage> maps(static_cast<std::size_t>(coils), ComplexImage(height, width));
    const double sigma = 0.6;
    for (int r = 0; r < height; ++r) {
        const double y = 2.0 * (r + 0.5) / height - 1.0;
        for (int c = 0; c < width; ++c) {
            const double x = 2.0 * (c + 0.5) / width - 1.0;
            std::vector<Complex> s(static_cast<std::size_t>(coils));
            double sos = 0.0;
            for (int k = 0; k < coils; ++k) {
                if (uniform) {
                    s[static_cast<std::size_t>(k)] = {1.0, 0.0};
                } else {
                    const double a = 2.0 * std::numbers::pi * k / coils;
                    const double dx = x - 0.7 * std::cos(a);
                    const double dy = y - 0.7 * std::sin(a);
                    const double mag = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                    const double phase = 0.5 * (x * std::cos(a) + y * std::sin(a));
                    s[static_cast<std::size_t>(k)] = std::polar(mag, phase);
                }
                sos += std::norm(s[static_cast<std::size_t>(k)]);
            }
            const double inv = 1.0 / std::sqrt(sos);
            for (int k = 0; k < coils; ++k) maps[static_cast<std::size_t>(k)](r, c) = s[static_cast<std::size_t>(k)] * inv;
        }
    }
    return maps;
}

/// Ground-truth magnitude in [0,1] and its fully sampled multicoil k-space.
inline Phantom phantom_generate(const PhantomSpec& spec) {
    if (spec.coil_count < 1) throw InvalidArgument("phantom needs at least one coil");
    Phantom out;
    out.ground_truth = ellipse_image(spec);
    const auto maps = coil_sensitivities(spec.coil_count, spec.height, spec.width, spec.uniform_sensitivity);
    std::vector<ComplexImage> kspace;
    kspace.reserve(maps.size());
    for (const auto& s : maps) {
        ComplexImage coil_image(spec.height, spec.width);
        for (std::size_t i = 0; i < coil_image.size(); ++i) coil_image.values[i] = s.values[i] * out.ground_truth.values[i];
        kspace.push_back(fft2c(coil_image));
    }
    out.fully_sampled = KSpaceVolume(std::move(kspace));
    return out;
}

}  // namespace qmri::mri

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

// Layers with explicit forward/backward passes. Each layer caches what its
// backward needs during forward; backward accumulates (+=) into parameter
// gradients and returns the gradient with respect to its input.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/nn/gemm.hpp"
#include "qmri/nn/tensor.hpp"
#include "qmri/rng.hpp"

namespace qmri::nn {

template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Parameter() = default;
    Parameter(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(shape) {}

    void zero_grad() { grad.fill(T{0}); }
};

enum class LayerKind { Conv3x3, Conv2x2s2, TConv2x2s2, BatchNorm, Conv1x1 };

inline const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv3x3: return "conv3x3";
        case LayerKind::Conv2x2s2: return "conv2x2s2";
        case LayerKind::TConv2x2s2: return "tconv2x2s2";
        case LayerKind::BatchNorm: return "batchnorm";
        case LayerKind::Conv1x1: return "conv1x1";
    }
    return "?";
}

/// Weight variance is kInitGain / fan_in. 1/3 is the variance of the usual
/// uniform(+-1/sqrt(fan_in)) convolution default.
inline constexpr double kInitGain = 1.0 / 3.0;

namespace detail {

inline void require_cache(bool cached, const char* layer) {
    if (!cached) throw StateError(std::string(layer) + ": backward called before forward");
}

inline void require_shape(const Shape& got, const Shape& want, const char* what) {
    if (!(got == want)) throw InvalidArgument(std::string(what) + ": expected " + want.str() + ", got " + got.str());
}

}  // namespace detail

/// 2-D cross-correlation, square kernel, lowered to GEMM via im2col.
template <typename T>
class Conv2d {
  public:
    Conv2d() = default;
    Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride, int padding)
        : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride), pad_(padding),
          weight_(name + ".weight", Shape{out_channels, in_channels, kernel, kernel}),
          bias_(name + ".bias", Shape{1, out_channels, 1, 1}) {
        if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1) {
            throw InvalidArgument(name + ": conv extents must be positive");
        }
        if (padding != 0 && padding != 1) throw InvalidArgument(name + ": padding must be 0 or 1");
    }

    int in_channels() const { return in_; }
    int out_channels() const { return out_; }
    int kernel() const { return k_; }
    int stride() const { return stride_; }
    int padding() const { return pad_; }
    Parameter<T>& weight() { return weight_; }
    Parameter<T>& bias() { return bias_; }
    const Parameter<T>& weight() const { return weight_; }
    const Parameter<T>& bias() const { return bias_; }

    LayerKind kind() const {
        if (k_ == 1) return LayerKind::Conv1x1;
        if (k_ == 2 && stride_ == 2) return LayerKind::Conv2x2s2;
        return LayerKind::Conv3x3;
    }

    /// Fan-in scaled normal weights with variance 1 / (3 fan_in), zero bias.
    void init(Rng& rng) {
        const double stddev = std::sqrt(kInitGain / (static_cast<double>(in_) * k_ * k_));
        weight_.value = randn<T>(weight_.value.shape(), rng, stddev);
        bias_.value.fill(T{0});
    }

    Shape output_shape(const Shape& in) const {
        if (in.c != in_) {
            throw InvalidArgument(weight_.name + ": expected " + std::to_string(in_) + " input channels, got " +
                                  std::to_string(in.c));
        }
        return {in.n, out_, out_extent(in.h), out_extent(in.w)};
    }

    Tensor<T> forward(const Tensor<T>& x) {
        const Shape os = output_shape(x.shape());
        input_ = x;
        cached_ = true;
        Tensor<T> y(os);
        const std::size_t p = os.plane();
        const std::size_t r = static_cast<std::size_t>(in_) * k_ * k_;
        for (int n = 0; n < x.n(); ++n) {
            T* out = y.sample(n);
            for (int co = 0; co < out_; ++co) std::fill_n(out + co * p, p, bias_.value[static_cast<std::size_t>(co)]);
            const T* col = lowered(x, n, os);
            gemm::nn<T>(static_cast<std::size_t>(out_), p, r, weight_.value.data(), col, out);
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        detail::require_cache(cached_, "conv2d");
        const Shape os = output_shape(input_.shape());
        detail::require_shape(grad_out.shape(), os, "conv2d backward");
        Tensor<T> grad_in(input_.shape());
        const std::size_t p = os.plane();
        const std::size_t r = static_cast<std::size_t>(in_) * k_ * k_;
        std::vector<T> dcol;
        for (int n = 0; n < input_.n(); ++n) {
            const T* g = grad_out.sample(n);
            for (int co = 0; co < out_; ++co) {
                T s = 0;
                const T* gc = g + co * p;
                for (std::size_t j = 0; j < p; ++j) s += gc[j];
                bias_.grad[static_cast<std::size_t>(co)] += s;
            }
            const T* col = lowered(input_, n, os);
            gemm::nt<T>(static_cast<std::size_t>(out_), r, p, g, col, weight_.grad.data());
            if (direct(os)) {
                gemm::tn<T>(r, p, static_cast<std::size_t>(out_), weight_.value.data(), g, grad_in.sample(n));
            } else {
                dcol.assign(r * p, T{0});
                gemm::tn<T>(r, p, static_cast<std::size_t>(out_), weight_.value.data(), g, dcol.data());
                col2im(dcol.data(), grad_in.sample(n), input_.shape(), os);
            }
        }
        return grad_in;
    }

    std::vector<Parameter<T>*> parameters() { return {&weight_, &bias_}; }

  private:
    int out_extent(int in) const {
        const int span = in + 2 * pad_ - k_;
        if (span < 0 || span % stride_ != 0) {
            throw InvalidArgument(weight_.name + ": input extent " + std::to_string(in) +
                                  " gives a non-integer output size");
        }
        return span / stride_ + 1;
    }

    // 1x1 stride-1 unpadded convolution reads the input plane directly.
    bool direct(const Shape& os) const { return k_ == 1 && stride_ == 1 && pad_ == 0 && os.h == input_.h(); }

    const T* lowered(const Tensor<T>& x, int n, const Shape& os) {
        if (k_ == 1 && stride_ == 1 && pad_ == 0) return x.sample(n);
        const std::size_t p = os.plane();
        col_.assign(static_cast<std::size_t>(in_) * k_ * k_ * p, T{0});
        const int h = x.h();
        const int w = x.w();
        for (int ci = 0; ci < in_; ++ci) {
            const T* src = x.plane(n, ci);
            for (int ki = 0; ki < k_; ++ki) {
                for (int kj = 0; kj < k_; ++kj) {
                    T* dst = col_.data() + ((static_cast<std::size_t>(ci) * k_ + ki) * k_ + kj) * p;
                    for (int oh = 0; oh < os.h; ++oh) {
                        const int ih = oh * stride_ + ki - pad_;
                        if (ih < 0 || ih >= h) continue;
                        for (int ow = 0; ow < os.w; ++ow) {
                            const int iw = ow * stride_ + kj - pad_;
                            if (iw >= 0 && iw < w) dst[oh * os.w + ow] = src[ih * w + iw];
                        }
                    }
                }
            }
        }
        return col_.data();
    }

    void col2im(const T* dcol, T* dst, const Shape& is, const Shape& os) const {
        const std::size_t p = os.plane();
        for (int ci = 0; ci < in_; ++ci) {
            T* plane = dst + static_cast<std::size_t>(ci) * is.plane();
            for (int ki = 0; ki < k_; ++ki) {
                for (int kj = 0; kj < k_; ++kj) {
                    const T* src = dcol + ((static_cast<std::size_t>(ci) * k_ + ki) * k_ + kj) * p;
                    for (int oh = 0; oh < os.h; ++oh) {
                        const int ih = oh * stride_ + ki - pad_;
                        if (ih < 0 || ih >= is.h) continue;
                        for (int ow = 0; ow < os.w; ++ow) {
                            const int iw = ow * stride_ + kj - pad_;
                            if (iw >= 0 && iw < is.w) plane[ih * is.w + iw] += src[oh * os.w + ow];
                        }
                    }
                }
            }
        }
    }

    int in_ = 0, out_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
    Parameter<T> weight_, bias_;
    Tensor<T> input_;
    bool cached_ = false;
    std::vector<T> col_;
};

/// Transposed convolution, kernel 2, stride 2: exact x2 upsampling.
/// Weight layout (in, out, 2, 2), the adjoint of a 2x2 stride-2 Conv2d with the same array.
template <typename T>
class ConvTranspose2x2 {
  public:
    ConvTranspose2x2() = default;
    ConvTranspose2x2(std::string name, int in_channels, int out_channels)
        : in_(in_channels), out_(out_channels), weight_(name + ".weight", Shape{in_channels, out_channels, 2, 2}),
          bias_(name + ".bias", Shape{1, out_channels, 1, 1}) {
        if (in_channels < 1 || out_channels < 1) throw InvalidArgument(name + ": channel counts must be positive");
    }

    LayerKind kind() const { return LayerKind::TConv2x2s2; }
    int in_channels() const { return in_; }
    int out_channels() const { return out_; }
    Parameter<T>& weight() { return weight_; }
    Parameter<T>& bias() { return bias_; }

    void init(Rng& rng) {
        weight_.value = randn<T>(weight_.value.shape(), rng, std::sqrt(kInitGain / in_));
        bias_.value.fill(T{0});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.c() != in_) throw InvalidArgument(weight_.name + ": input channel mismatch");
        input_ = x;
        cached_ = true;
        const std::size_t p = x.shape().plane();
        const std::size_t m = static_cast<std::size_t>(out_) * 4;
        Tensor<T> y(Shape{x.n(), out_, 2 * x.h(), 2 * x.w()});
        std::vector<T> cols(m * p);
        for (int n = 0; n < x.n(); ++n) {
            std::fill(cols.begin(), cols.end(), T{0});
            gemm::tn<T>(m, p, static_cast<std::size_t>(in_), weight_.value.data(), x.sample(n), cols.data());
            for (int co = 0; co < out_; ++co) {
                T* dst = y.plane(n, co);
                const T b = bias_.value[static_cast<std::size_t>(co)];
                for (int a = 0; a < 2; ++a) {
                    for (int bb = 0; bb < 2; ++bb) {
                        const T* src = cols.data() + (static_cast<std::size_t>(co) * 4 + a * 2 + bb) * p;
                        for (int i = 0; i < x.h(); ++i) {
                            T* row = dst + (2 * i + a) * y.w() + bb;
                            for (int j = 0; j < x.w(); ++j) row[2 * j] = src[i * x.w() + j] + b;
                        }
                    }
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        detail::require_cache(cached_, "tconv2");
        detail::require_shape(grad_out.shape(), Shape{input_.n(), out_, 2 * input_.h(), 2 * input_.w()},
                              "tconv2 backward");
        const std::size_t p = input_.shape().plane();
        const std::size_t m = static_cast<std::size_t>(out_) * 4;
        Tensor<T> grad_in(input_.shape());
        std::vector<T> gcols(m * p);
        const int h = input_.h();
        const int w = input_.w();
        for (int n = 0; n < input_.n(); ++n) {
            for (int co = 0; co < out_; ++co) {
                const T* src = grad_out.plane(n, co);
                T s = 0;
                for (std::size_t j = 0; j < 4 * p; ++j) s += src[j];
                bias_.grad[static_cast<std::size_t>(co)] += s;
                for (int a = 0; a < 2; ++a) {
                    for (int bb = 0; bb < 2; ++bb) {
                        T* dst = gcols.data() + (static_cast<std::size_t>(co) * 4 + a * 2 + bb) * p;
                        for (int i = 0; i < h; ++i) {
                            const T* row = src + (2 * i + a) * (2 * w) + bb;
                            for (int j = 0; j < w; ++j) dst[i * w + j] = row[2 * j];
                        }
                    }
                }
            }
            gemm::nn<T>(static_cast<std::size_t>(in_), p, m, weight_.value.data(), gcols.data(), grad_in.sample(n));
            gemm::nt<T>(static_cast<std::size_t>(in_), m, p, input_.sample(n), gcols.data(), weight_.grad.data());
        }
        return grad_in;
    }

    std::vector<Parameter<T>*> parameters() { return {&weight_, &bias_}; }

  private:
    int in_ = 0, out_ = 0;
    Parameter<T> weight_, bias_;
    Tensor<T> input_;
    bool cached_ = false;
};

/// Per-channel batch normalization. Train mode uses biased batch variance for
/// normalization and the unbiased estimate for the running average.
template <typename T>
class BatchNorm2d {
  public:
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

    BatchNorm2d() = default;
    BatchNorm2d(std::string name, int channels)
        : channels_(channels), gamma_(name + ".gamma", Shape{1, channels, 1, 1}),
          beta_(name + ".beta", Shape{1, channels, 1, 1}), running_mean_(Shape{1, channels, 1, 1}, T{0}),
          running_var_(Shape{1, channels, 1, 1}, T{1}), name_(std::move(name)) {
        gamma_.value.fill(T{1});
    }

    LayerKind kind() const { return LayerKind::BatchNorm; }
    const std::string& name() const { return name_; }
    bool training() const { return training_; }
    void set_training(bool on) { training_ = on; }
    Parameter<T>& gamma() { return gamma_; }
    Parameter<T>& beta() { return beta_; }
    Tensor<T>& running_mean() { return running_mean_; }
    Tensor<T>& running_var() { return running_var_; }
    const Tensor<T>& running_mean() const { return running_mean_; }
    const Tensor<T>& running_var() const { return running_var_; }

    void init() {
        gamma_.value.fill(T{1});
        beta_.value.fill(T{0});
        running_mean_.fill(T{0});
        running_var_.fill(T{1});
    }

    Tensor<T> forward(const Tensor<T>& x) {
        if (x.c() != channels_) throw InvalidArgument(name_ + ": channel mismatch");
        const std::size_t plane = x.shape().plane();
        const std::size_t count = static_cast<std::size_t>(x.n()) * plane;
        if (training_ && count < 2) {
            throw DegenerateInput(name_ + ": batch statistics need more than one element per channel");
        }
        xhat_ = Tensor<T>(x.shape());
        inv_std_.assign(static_cast<std::size_t>(channels_), T{0});
        Tensor<T> y(x.shape());
        for (int c = 0; c < channels_; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            double mean, var;
            if (training_) {
                double s = 0.0;
                for (int n = 0; n < x.n(); ++n) {
                    const T* src = x.plane(n, c);
                    for (std::size_t j = 0; j < plane; ++j) s += src[j];
                }
                mean = s / static_cast<double>(count);
                double ss = 0.0;
                for (int n = 0; n < x.n(); ++n) {
                    const T* src = x.plane(n, c);
                    for (std::size_t j = 0; j < plane; ++j) {
                        const double d = src[j] - mean;
                        ss += d * d;
                    }
                }
                var = ss / static_cast<double>(count);
                const double unbiased = ss / static_cast<double>(count - 1);
                running_mean_[ci] = static_cast<T>((1.0 - kMomentum) * running_mean_[ci] + kMomentum * mean);
                running_var_[ci] = static_cast<T>((1.0 - kMomentum) * running_var_[ci] + kMomentum * unbiased);
            } else {
                mean = running_mean_[ci];
                var = running_var_[ci];
            }
            const double inv = 1.0 / std::sqrt(var + kEps);
            inv_std_[ci] = static_cast<T>(inv);
            const T g = gamma_.value[ci];
            const T b = beta_.value[ci];
            for (int n = 0; n < x.n(); ++n) {
                const T* src = x.plane(n, c);
                T* xh = xhat_.plane(n, c);
                T* dst = y.plane(n, c);
                for (std::size_t j = 0; j < plane; ++j) {
                    xh[j] = static_cast<T>((src[j] - mean) * inv);
                    dst[j] = g * xh[j] + b;
                }
            }
        }
        cached_training_ = training_;
        cached_ = true;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        detail::require_cache(cached_, "batchnorm");
        detail::require_shape(grad_out.shape(), xhat_.shape(), "batchnorm backward");
        const std::size_t plane = xhat_.shape().plane();
        const double count = static_cast<double>(xhat_.n()) * static_cast<double>(plane);
        Tensor<T> grad_in(xhat_.shape());
        for (int c = 0; c < channels_; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int n = 0; n < xhat_.n(); ++n) {
                const T* dy = grad_out.plane(n, c);
                const T* xh = xhat_.plane(n, c);
                for (std::size_t j = 0; j < plane; ++j) {
                    sum_dy += dy[j];
                    sum_dy_xhat += static_cast<double>(dy[j]) * xh[j];
                }
            }
            gamma_.grad[ci] += static_cast<T>(sum_dy_xhat);
            beta_.grad[ci] += static_cast<T>(sum_dy);
            const double scale = static_cast<double>(gamma_.value[ci]) * inv_std_[ci];
            const double mean_dy = cached_training_ ? sum_dy / count : 0.0;
            const double mean_dy_xhat = cached_training_ ? sum_dy_xhat / count : 0.0;
            for (int n = 0; n < xhat_.n(); ++n) {
                const T* dy = grad_out.plane(n, c);
                const T* xh = xhat_.plane(n, c);
                T* dx = grad_in.plane(n, c);
                for (std::size_t j = 0; j < plane; ++j) {
                    dx[j] = static_cast<T>(scale * (dy[j] - mean_dy - xh[j] * mean_dy_xhat));
                }
            }
        }
        return grad_in;
    }

    std::vector<Parameter<T>*> parameters() { return {&gamma_, &beta_}; }

  private:
    int channels_ = 0;
    Parameter<T> gamma_, beta_;
    Tensor<T> running_mean_, running_var_;
    std::string name_;
    bool training_ = true;
    bool cached_ = false;
    bool cached_training_ = true;
    Tensor<T> xhat_;
    std::vector<T> inv_std_;
};

/// max(0, x); the subgradient at 0 is 0.
template <typename T>
class ReLU {
  public:
    Tensor<T> forward(const Tensor<T>& x) {
        Tensor<T> y(x.shape());
        mask_.assign(x.size(), 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] > T{0}) {
                y[i] = x[i];
                mask_[i] = 1;
            } else if (std::isnan(x[i])) {
                y[i] = x[i];  // propagate, so a bad input surfaces as a NaN loss
            }
        }
        shape_ = x.shape();
        cached_ = true;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        detail::require_cache(cached_, "relu");
        detail::require_shape(grad_out.shape(), shape_, "relu backward");
        Tensor<T> grad_in(shape_);
        for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] = mask_[i] ? grad_out[i] : T{0};
        return grad_in;
    }

  private:
    std::vector<unsigned char> mask_;
    Shape shape_;
    bool cached_ = false;
};

/// 2x2 max pooling, stride 2. Ties go to the first element in row-major order; NaN wins.
template <typename T>
class MaxPool2 {
  public:
    Tensor<T> forward(const Tensor<T>& x) {
        if (x.h() % 2 != 0 || x.w() % 2 != 0) {
            throw InvalidArgument("maxpool2 needs even spatial dims, got " + x.shape().str());
        }
        in_shape_ = x.shape();
        Tensor<T> y(Shape{x.n(), x.c(), x.h() / 2, x.w() / 2});
        argmax_.assign(y.size(), 0);
        std::size_t o = 0;
        for (int n = 0; n < x.n(); ++n) {
            for (int c = 0; c < x.c(); ++c) {
                const T* src = x.plane(n, c);
                for (int i = 0; i < y.h(); ++i) {
                    for (int j = 0; j < y.w(); ++j, ++o) {
                        const std::size_t base = static_cast<std::size_t>(2 * i) * x.w() + 2 * j;
                        const std::size_t cand[4] = {base, base + 1, base + x.w(), base + x.w() + 1};
                        std::size_t best = cand[0];
                        for (int t = 1; t < 4; ++t) {
                            if (src[cand[t]] > src[best] || std::isnan(src[cand[t]])) best = cand[t];
                        }
                        y[o] = src[best];
                        argmax_[o] = best;
                    }
                }
            }
        }
        cached_ = true;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        detail::require_cache(cached_, "maxpool2");
        detail::require_shape(grad_out.shape(), Shape{in_shape_.n, in_shape_.c, in_shape_.h / 2, in_shape_.w / 2},
                              "maxpool2 backward");
        Tensor<T> grad_in(in_shape_);
        const std::size_t out_plane = grad_out.shape().plane();
        for (std::size_t o = 0; o < grad_out.size(); ++o) {
            const std::size_t plane_index = o / out_plane;
            grad_in.data()[plane_index * in_shape_.plane() + argmax_[o]] += grad_out[o];
        }
        return grad_in;
    }

  private:
    std::vector<std::size_t> argmax_;
    Shape in_shape_;
    bool cached_ = false;
};

/// Channel stacking [a; b].
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
        throw InvalidArgument("concat_channels: " + a.shape().str() + " vs " + b.shape().str());
    }
    Tensor<T> out(Shape{a.n(), a.c() + b.c(), a.h(), a.w()});
    const std::size_t pa = static_cast<std::size_t>(a.c()) * a.shape().plane();
    const std::size_t pb = static_cast<std::size_t>(b.c()) * b.shape().plane();
    for (int n = 0; n < a.n(); ++n) {
        std::copy_n(a.sample(n), pa, out.sample(n));
        std::copy_n(b.sample(n), pb, out.sample(n) + pa);
    }
    return out;
}

/// Inverse of concat_channels: first `channels_a` channels, then the rest.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& t, int channels_a) {
    if (channels_a < 1 || channels_a >= t.c()) throw InvalidArgument("split_channels: bad split point");
    Tensor<T> a(Shape{t.n(), channels_a, t.h(), t.w()});
    Tensor<T> b(Shape{t.n(), t.c() - channels_a, t.h(), t.w()});
    const std::size_t pa = a.size() / static_cast<std::size_t>(t.n());
    const std::size_t pb = b.size() / static_cast<std::size_t>(t.n());
    for (int n = 0; n < t.n(); ++n) {
        std::copy_n(t.sample(n), pa, a.sample(n));
        std::copy_n(t.sample(n) + pa, pb, b.sample(n));
    }
    return {std::move(a), std::move(b)};
}

template <typename T>
struct LossResult {
    double loss = 0.0;
    Tensor<T> grad;
};

/// Mean squared error over all elements; grad = 2 (pred - target) / count.
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
    if (!(prediction.shape() == target.shape())) {
        throw InvalidArgument("mse_loss: " + prediction.shape().str() + " vs " + target.shape().str());
    }
    LossResult<T> out{0.0, Tensor<T>(prediction.shape())};
    const double count = static_cast<double>(prediction.size());
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = static_cast<double>(prediction[i]) - static_cast<double>(target[i]);
        out.loss += d * d;
        out.grad[i] = static_cast<T>(2.0 * d / count);
    }
    out.loss /= count;
    return out;
}

}  // namespace qmri::nn

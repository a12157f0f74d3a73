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

// The hybrid reconstruction network: a half-resolution front end (fixed
// quanvolution or a trainable 2x2 stride-2 convolution) feeding an
// asymmetric U-net with two poolings and three upsamplings, so the output
// comes back at the full input resolution.
//
// Layout on the front-end output (H/2), widths at scale 1:
//   enc1  H/2  conv3x3 c->16, 16->16                 -> skip1, pool
//   enc2  H/4  conv3x3 16->32, 32->32                -> skip2, pool
//   mid   H/8  conv3x3 32->64, 64->128, 128->256
//   dec1  H/4  up 256->128, cat skip2, conv 160->128, 128->64
//   dec2  H/2  up 64->32, cat skip1, conv 48->32, 32->16
//   dec3  H    up 16->16, conv 16->16, conv1x1 16->1 (linear)
// Every conv3x3 is followed by batch norm and ReLU.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/image.hpp"
#include "qmri/nn/layers.hpp"
#include "qmri/nn/tensor.hpp"
#include "qmri/qsim.hpp"
#include "qmri/quanv.hpp"
#include "qmri/rng.hpp"

namespace qmri::nn {

enum class FrontEnd { Quantum, Classical };

inline const char* to_string(FrontEnd f) { return f == FrontEnd::Quantum ? "quantum" : "classical"; }

inline FrontEnd parse_front_end(const std::string& s) {
    if (s == "quantum") return FrontEnd::Quantum;
    if (s == "classical") return FrontEnd::Classical;
    throw InvalidArgument("unknown front end '" + s + "' (expected quantum|classical)");
}

struct NetworkConfig {
    FrontEnd front_end = FrontEnd::Quantum;
    double width_scale = 1.0;
    qsim::CircuitConfig circuit{};
    std::uint64_t seed = 0;
};

/// Channel count after width scaling, never below 1.
inline int scaled_width(int base, double scale) {
    return std::max(1, static_cast<int>(std::lround(base * scale)));
}

/// Feature channels produced by the front end.
inline int front_end_channels(const NetworkConfig& config) {
    return config.front_end == FrontEnd::Quantum ? config.circuit.output_channels() : 1;
}

/// conv3x3 (pad 1) + batch norm + ReLU.
template <typename T>
class ConvBlock {
  public:
    ConvBlock() = default;
    ConvBlock(const std::string& name, int in, int out)
        : conv_(name + ".conv", in, out, 3, 1, 1), bn_(name + ".bn", out) {}

    void init(Rng& rng) {
        conv_.init(rng);
        bn_.init();
    }
    Tensor<T> forward(const Tensor<T>& x) { return relu_.forward(bn_.forward(conv_.forward(x))); }
    Tensor<T> backward(const Tensor<T>& g) { return conv_.backward(bn_.backward(relu_.backward(g))); }
    void set_training(bool on) { bn_.set_training(on); }
    Conv2d<T>& conv() { return conv_; }
    BatchNorm2d<T>& bn() { return bn_; }

    void collect(std::vector<Parameter<T>*>& out) {
        for (auto* p : conv_.parameters()) out.push_back(p);
        for (auto* p : bn_.parameters()) out.push_back(p);
    }

  private:
    Conv2d<T> conv_;
    BatchNorm2d<T> bn_;
    ReLU<T> relu_;
};

template <typename T>
struct NamedBuffer {
    std::string name;
    Tensor<T>* tensor;
};

template <typename T>
class HybridNetwork {
  public:
    explicit HybridNetwork(NetworkConfig config) : config_(config) {
        if (!(config.width_scale > 0.0) || !std::isfinite(config.width_scale) || config.width_scale > 16.0) {
            throw InvalidArgument("width_scale must lie in (0, 16]");
        }
        config.circuit.validate();
        const double s = config.width_scale;
        const int c16 = scaled_width(16, s), c32 = scaled_width(32, s), c64 = scaled_width(64, s),
                  c128 = scaled_width(128, s), c256 = scaled_width(256, s);
        const int fc = front_end_channels(config);

        if (config.front_end == FrontEnd::Classical) front_ = Conv2d<T>("front.conv", 1, 1, 2, 2, 0);
        enc1a_ = ConvBlock<T>("enc1.0", fc, c16);
        enc1b_ = ConvBlock<T>("enc1.1", c16, c16);
        enc2a_ = ConvBlock<T>("enc2.0", c16, c32);
        enc2b_ = ConvBlock<T>("enc2.1", c32, c32);
        mid_a_ = ConvBlock<T>("mid.0", c32, c64);
        mid_b_ = ConvBlock<T>("mid.1", c64, c128);
        mid_c_ = ConvBlock<T>("mid.2", c128, c256);
        up1_ = ConvTranspose2x2<T>("dec1.up", c256, c128);
        dec1a_ = ConvBlock<T>("dec1.0", c128 + c32, c128);
        dec1b_ = ConvBlock<T>("dec1.1", c128, c64);
        up2_ = ConvTranspose2x2<T>("dec2.up", c64, c32);
        dec2a_ = ConvBlock<T>("dec2.0", c32 + c16, c32);
        dec2b_ = ConvBlock<T>("dec2.1", c32, c16);
        up3_ = ConvTranspose2x2<T>("dec3.up", c16, c16);
        dec3a_ = ConvBlock<T>("dec3.0", c16, c16);
        head_ = Conv2d<T>("dec3.head", c16, 1, 1, 1, 0);
        skip1_channels_ = c16;
        up1_channels_ = c128;
        up2_channels_ = c32;

        Rng rng(config.seed);
        if (config.front_end == FrontEnd::Classical) front_.init(rng);
        for (auto* b : blocks()) b->init(rng);
        up1_.init(rng);
        up2_.init(rng);
        up3_.init(rng);
        head_.init(rng);
    }

    const NetworkConfig& config() const { return config_; }
    FrontEnd front_end() const { return config_.front_end; }
    int feature_channels() const { return front_end_channels(config_); }

    void set_training(bool on) {
        for (auto* b : blocks()) b->set_training(on);
        training_ = on;
    }
    bool training() const { return training_; }

    /// Fixed quanvolution of each N x 1 x H x W image (no gradient flows here).
    Tensor<T> quantum_features(const Tensor<T>& images) const {
        check_image_batch(images);
        const int fc = feature_channels();
        Tensor<T> out(Shape{images.n(), fc, images.h() / 2, images.w() / 2});
        for (int n = 0; n < images.n(); ++n) {
            Image img(images.h(), images.w());
            for (std::size_t i = 0; i < img.size(); ++i) img.values[i] = static_cast<double>(images.sample(n)[i]);
            const auto fm = quanv::quanvolve(img, config_.circuit);
            for (std::size_t i = 0; i < fm.values.size(); ++i) out.sample(n)[i] = static_cast<T>(fm.values[i]);
        }
        return out;
    }

    /// Full-resolution images in, full-resolution reconstruction out.
    Tensor<T> forward(const Tensor<T>& images) {
        check_image_batch(images);
        if (config_.front_end == FrontEnd::Quantum) return body_forward(quantum_features(images));
        front_cached_ = true;
        return body_forward(front_.forward(images));
    }

    /// Entry point past the front end, for precomputed quantum features.
    Tensor<T> forward_features(const Tensor<T>& features) {
        if (config_.front_end != FrontEnd::Quantum) {
            throw InvalidArgument("forward_features bypasses the trainable classical front end");
        }
        return body_forward(features);
    }

    /// Accumulates gradients of every trainable parameter.
    void backward(const Tensor<T>& grad_output) {
        if (!forward_done_) throw StateError("network backward called before forward");
        auto g = body_backward(grad_output);
        if (config_.front_end == FrontEnd::Classical) {
            if (!front_cached_) throw StateError("classical front end has no cached forward");
            front_.backward(g);
        }
    }

    std::vector<Parameter<T>*> parameters() {
        std::vector<Parameter<T>*> out;
        if (config_.front_end == FrontEnd::Classical) {
            for (auto* p : front_.parameters()) out.push_back(p);
        }
        auto add_block = [&](ConvBlock<T>& b) { b.collect(out); };
        auto add = [&](auto& layer) {
            for (auto* p : layer.parameters()) out.push_back(p);
        };
        add_block(enc1a_);
        add_block(enc1b_);
        add_block(enc2a_);
        add_block(enc2b_);
        add_block(mid_a_);
        add_block(mid_b_);
        add_block(mid_c_);
        add(up1_);
        add_block(dec1a_);
        add_block(dec1b_);
        add(up2_);
        add_block(dec2a_);
        add_block(dec2b_);
        add(up3_);
        add_block(dec3a_);
        add(head_);
        return out;
    }

    /// Batch-norm running statistics (state, not trained).
    std::vector<NamedBuffer<T>> buffers() {
        std::vector<NamedBuffer<T>> out;
        for (auto* b : blocks()) {
            out.push_back({b->bn().name() + ".running_mean", &b->bn().running_mean()});
            out.push_back({b->bn().name() + ".running_var", &b->bn().running_var()});
        }
        return out;
    }

    std::size_t parameter_count() {
        std::size_t total = 0;
        for (auto* p : parameters()) total += p->value.size();
        return total;
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

  private:
    std::vector<ConvBlock<T>*> blocks() {
        return {&enc1a_, &enc1b_, &enc2a_, &enc2b_, &mid_a_, &mid_b_, &mid_c_,
                &dec1a_, &dec1b_, &dec2a_, &dec2b_, &dec3a_};
    }

    static void check_image_batch(const Tensor<T>& images) {
        if (images.c() != 1) throw InvalidArgument("network input must have 1 channel");
        if (images.h() % 8 != 0 || images.w() % 8 != 0) {
            throw InvalidArgument("network input dims must be multiples of 8, got " + images.shape().str());
        }
    }

    Tensor<T> body_forward(const Tensor<T>& features) {
        if (features.c() != feature_channels()) throw InvalidArgument("front-end feature channel mismatch");
        if (features.h() % 4 != 0 || features.w() % 4 != 0) {
            throw InvalidArgument("front-end features must be multiples of 4, got " + features.shape().str());
        }
        auto x = enc1b_.forward(enc1a_.forward(features));
        auto skip1 = x;
        x = pool1_.forward(x);
        x = enc2b_.forward(enc2a_.forward(x));
        auto skip2 = x;
        x = pool2_.forward(x);
        x = mid_c_.forward(mid_b_.forward(mid_a_.forward(x)));
        x = up1_.forward(x);
        x = dec1b_.forward(dec1a_.forward(concat_channels(x, skip2)));
        x = up2_.forward(x);
        x = dec2b_.forward(dec2a_.forward(concat_channels(x, skip1)));
        x = up3_.forward(x);
        x = head_.forward(dec3a_.forward(x));
        forward_done_ = true;
        return x;
    }

    Tensor<T> body_backward(const Tensor<T>& grad_output) {
        auto g = dec3a_.backward(head_.backward(grad_output));
        g = up3_.backward(g);
        g = dec2a_.backward(dec2b_.backward(g));
        auto [g_up2, g_skip1] = split_channels(g, up2_channels_);
        g = up2_.backward(g_up2);
        g = dec1a_.backward(dec1b_.backward(g));
        auto [g_up1, g_skip2] = split_channels(g, up1_channels_);
        g = up1_.backward(g_up1);
        g = mid_a_.backward(mid_b_.backward(mid_c_.backward(g)));
        g = pool2_.backward(g);
        add_into(g, g_skip2);
        g = enc2a_.backward(enc2b_.backward(g));
        g = pool1_.backward(g);
        add_into(g, g_skip1);
        return enc1a_.backward(enc1b_.backward(g));
    }

    static void add_into(Tensor<T>& acc, const Tensor<T>& g) {
        if (!(acc.shape() == g.shape())) throw InvalidArgument("skip gradient shape mismatch");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }

    NetworkConfig config_;
    Conv2d<T> front_;
    ConvBlock<T> enc1a_, enc1b_, enc2a_, enc2b_, mid_a_, mid_b_, mid_c_;
    ConvTranspose2x2<T> up1_, up2_, up3_;
    ConvBlock<T> dec1a_, dec1b_, dec2a_, dec2b_, dec3a_;
    Conv2d<T> head_;
    MaxPool2<T> pool1_, pool2_;
    int skip1_channels_ = 0, up1_channels_ = 0, up2_channels_ = 0;
    bool training_ = true;
    bool forward_done_ = false;
    bool front_cached_ = false;
};

}  // namespace qmri::nn

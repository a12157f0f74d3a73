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

#include <cmath>
#include <iostream>
#include <limits>

#include "gtest/gtest.h"
#include "qmri/nn/adam.hpp"
#include "qmri/nn/gradcheck.hpp"
#include "qmri/nn/layers.hpp"
#include "qmri/nn/network.hpp"

using namespace qmri;
using namespace qmri::nn;

namespace {

using TD = Tensor<double>;

std::vector<double> as_vector(const TD& t) { return t.values(); }

// Direct-loop cross-correlation, used as the reference for the im2col path.
TD naive_conv(const TD& x, const TD& w, const TD& b, int stride, int pad) {
    const int k = w.h();
    const int oh = (x.h() + 2 * pad - k) / stride + 1;
    const int ow = (x.w() + 2 * pad - k) / stride + 1;
    TD y(Shape{x.n(), w.n(), oh, ow});
    for (int n = 0; n < x.n(); ++n)
        for (int co = 0; co < w.n(); ++co)
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    double s = b[static_cast<std::size_t>(co)];
                    for (int ci = 0; ci < x.c(); ++ci)
                        for (int a = 0; a < k; ++a)
                            for (int bb = 0; bb < k; ++bb) {
                                const int r = i * stride + a - pad, c = j * stride + bb - pad;
                                if (r < 0 || c < 0 || r >= x.h() || c >= x.w()) continue;
                                s += w.at(co, ci, a, bb) * x.at(n, ci, r, c);
                            }
                    y.at(n, co, i, j) = s;
                }
    return y;
}

// Checks d<r, layer(x)>/d{x, params} against central differences.
template <typename Layer>
GradCheckReport check_layer(Layer& layer, TD& x, std::vector<Parameter<double>*> params, std::uint64_t seed) {
    Rng rng(seed);
    const TD probe_out = layer.forward(x);
    const TD r = randn<double>(probe_out.shape(), rng);
    for (auto* p : params) p->zero_grad();
    const TD gx = layer.backward(r);
    std::vector<GradBlock<double>> blocks;
    blocks.push_back({"input", x.span(), as_vector(gx)});
    for (auto* p : params) blocks.push_back({p->name, p->value.span(), as_vector(p->grad)});
    return gradient_check<double>([&] { return dot(layer.forward(x), r); }, blocks);
}

std::size_t conv_params(int in, int out, int k) { return static_cast<std::size_t>(out) * in * k * k + out; }

}  // namespace

TEST(nn, conv_identity_kernel) {
    Conv2d<double> conv("c", 1, 1, 3, 1, 1);
    conv.weight().value.fill(0.0);
    conv.weight().value.at(0, 0, 1, 1) = 1.0;
    Rng rng(1);
    const TD x = randn<double>(Shape{2, 1, 5, 6}, rng);
    EXPECT_EQ(conv.forward(x), x);
}

TEST(nn, conv2x2s2_all_ones) {
    Conv2d<double> conv("c", 1, 1, 2, 2, 0);
    conv.weight().value.fill(1.0);
    const TD y = conv.forward(TD(Shape{1, 1, 4, 6}, 1.0));
    EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 3}));
    for (const double v : y.values()) EXPECT_EQ(v, 4.0);
    EXPECT_THROW(conv.forward(TD(Shape{1, 1, 5, 6})), InvalidArgument);
}

TEST(nn, conv_matches_naive_loops) {
    Rng rng(2);
    for (const auto& [k, s, p] : {std::tuple{3, 1, 1}, std::tuple{3, 1, 0}, std::tuple{2, 2, 0}, std::tuple{1, 1, 0}}) {
        Conv2d<double> conv("c", 3, 5, k, s, p);
        conv.init(rng);
        conv.bias().value = randn<double>(conv.bias().value.shape(), rng);
        const TD x = randn<double>(Shape{2, 3, 8, 6}, rng);
        const TD y = conv.forward(x);
        const TD ref = naive_conv(x, conv.weight().value, conv.bias().value, s, p);
        ASSERT_EQ(y.shape(), ref.shape());
        for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
    }
}

TEST(nn, conv_gradients_random_shapes) {
    Rng rng(3);
    for (int trial = 0; trial < 12; ++trial) {
        const int kind = trial % 3;
        const int k = kind == 0 ? 3 : (kind == 1 ? 2 : 1);
        const int s = kind == 1 ? 2 : 1;
        const int p = kind == 0 ? 1 : 0;
        const int n = 1 + static_cast<int>(uniform_index(rng, 2));
        const int ci = 1 + static_cast<int>(uniform_index(rng, 3));
        const int co = 1 + static_cast<int>(uniform_index(rng, 3));
        const int h = 2 * (1 + static_cast<int>(uniform_index(rng, 3)));
        const int w = 2 * (1 + static_cast<int>(uniform_index(rng, 3)));
        Conv2d<double> conv("conv", ci, co, k, s, p);
        conv.init(rng);
        conv.bias().value = randn<double>(conv.bias().value.shape(), rng);
        TD x = randn<double>(Shape{n, ci, h, w}, rng);
        const auto rep = check_layer(conv, x, {&conv.weight(), &conv.bias()}, 100 + static_cast<std::uint64_t>(trial));
        EXPECT_LT(rep.worst(), 1e-4) << "k=" << k << " trial " << trial;
    }
}

TEST(nn, tconv_gradients_and_adjoint) {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const int ci = 1 + static_cast<int>(uniform_index(rng, 4));
        const int co = 1 + static_cast<int>(uniform_index(rng, 4));
        const int h = 1 + static_cast<int>(uniform_index(rng, 4));
        const int w = 1 + static_cast<int>(uniform_index(rng, 4));
        ConvTranspose2x2<double> up("up", ci, co);
        up.init(rng);
        up.bias().value = randn<double>(up.bias().value.shape(), rng);
        TD x = randn<double>(Shape{2, ci, h, w}, rng);
        const auto rep = check_layer(up, x, {&up.weight(), &up.bias()}, 200 + static_cast<std::uint64_t>(trial));
        EXPECT_LT(rep.worst(), 1e-4);

        // <tconv(x), y> == <x, conv(y)> with the same weights, biases zero.
        up.bias().value.fill(0.0);
        Conv2d<double> down("down", co, ci, 2, 2, 0);
        for (int a = 0; a < ci; ++a)
            for (int b = 0; b < co; ++b)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) down.weight().value.at(a, b, i, j) = up.weight().value.at(a, b, i, j);
        const TD y = randn<double>(Shape{2, co, 2 * h, 2 * w}, rng);
        EXPECT_NEAR(dot(up.forward(x), y), dot(x, down.forward(y)), 1e-10);
    }
}

TEST(nn, batchnorm_gradients) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const int c = 1 + static_cast<int>(uniform_index(rng, 4));
        BatchNorm2d<double> bn("bn", c);
        bn.gamma().value = rand_uniform<double>(bn.gamma().value.shape(), rng, 0.5, 1.5);
        bn.beta().value = randn<double>(bn.beta().value.shape(), rng);
        TD x = randn<double>(Shape{1 + trial % 3, c, 2 + trial % 3, 3}, rng, 2.0);
        const auto rep = check_layer(bn, x, {&bn.gamma(), &bn.beta()}, 300 + static_cast<std::uint64_t>(trial));
        EXPECT_LT(rep.worst(), 1e-4);
    }
}

TEST(nn, batchnorm_statistics) {
    BatchNorm2d<double> bn("bn", 1);
    const TD x(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
    const TD y = bn.forward(x);
    // Batch-normalized with the biased variance 1.25.
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(y[static_cast<std::size_t>(i)], (i + 1 - 2.5) / std::sqrt(1.25 + 1e-5), 1e-12);
    // Running estimates use the unbiased variance 5/3.
    EXPECT_NEAR(bn.running_mean()[0], 0.1 * 2.5, 1e-15);
    EXPECT_NEAR(bn.running_var()[0], 0.9 + 0.1 * (5.0 / 3.0), 1e-15);

    bn.set_training(false);
    bn.gamma().value[0] = 2.0;
    bn.beta().value[0] = 0.5;
    const TD e = bn.forward(x);
    const double a = 2.0 / std::sqrt(bn.running_var()[0] + 1e-5);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(e[i], a * (x[i] - bn.running_mean()[0]) + 0.5, 1e-12);
}

TEST(nn, batchnorm_degenerate_inputs) {
    BatchNorm2d<double> bn("bn", 2);
    EXPECT_THROW(bn.forward(TD(Shape{1, 2, 1, 1})), DegenerateInput);
    bn.set_training(false);
    EXPECT_NO_THROW(bn.forward(TD(Shape{1, 2, 1, 1})));
    bn.set_training(true);
    const TD y = bn.forward(TD(Shape{2, 2, 3, 3}, 7.0));
    for (const double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(nn, relu_and_maxpool_gradients) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        TD x = randn<double>(Shape{2, 2, 2 + 2 * (trial % 3), 4}, rng);
        for (auto& v : x.values()) {
            if (std::abs(v) < 1e-3) v = 0.5;
        }
        ReLU<double> relu;
        EXPECT_LT(check_layer(relu, x, {}, 400 + static_cast<std::uint64_t>(trial)).worst(), 1e-4);
        MaxPool2<double> pool;
        EXPECT_LT(check_layer(pool, x, {}, 500 + static_cast<std::uint64_t>(trial)).worst(), 1e-4);
    }
}

TEST(nn, relu_subgradient_and_pool_ties) {
    ReLU<double> relu;
    relu.forward(TD(Shape{1, 1, 1, 3}, std::vector<double>{-1, 0, 2}));
    const TD g = relu.backward(TD(Shape{1, 1, 1, 3}, 1.0));
    EXPECT_EQ(g.values(), (std::vector<double>{0, 0, 1}));

    MaxPool2<double> pool;
    const TD y = pool.forward(TD(Shape{1, 1, 2, 2}, 3.0));
    EXPECT_EQ(y[0], 3.0);
    const TD gp = pool.backward(TD(Shape{1, 1, 1, 1}, 1.0));
    EXPECT_EQ(gp.values(), (std::vector<double>{1, 0, 0, 0}));
    EXPECT_THROW(pool.forward(TD(Shape{1, 1, 3, 2})), InvalidArgument);
}

TEST(nn, mse_loss_gradient) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        TD p = randn<double>(Shape{1 + trial % 2, 1, 3, 2 + trial}, rng);
        const TD t = randn<double>(p.shape(), rng);
        const auto res = mse_loss(p, t);
        std::vector<GradBlock<double>> blocks{{"pred", p.span(), as_vector(res.grad)}};
        EXPECT_LT(gradient_check<double>([&] { return mse_loss(p, t).loss; }, blocks).worst(), 1e-4);
    }
    const TD a(Shape{1, 1, 2, 2}, 1.0);
    EXPECT_EQ(mse_loss(a, a).loss, 0.0);
    EXPECT_NEAR(mse_loss(a, TD(Shape{1, 1, 2, 2}, 0.0)).loss, 1.0, 1e-15);
}

TEST(nn, concat_split_round_trip) {
    Rng rng(8);
    const TD a = randn<double>(Shape{2, 3, 4, 5}, rng);
    const TD b = randn<double>(Shape{2, 2, 4, 5}, rng);
    const TD c = concat_channels(a, b);
    EXPECT_EQ(c.shape(), (Shape{2, 5, 4, 5}));
    EXPECT_EQ(c.at(1, 3, 2, 1), b.at(1, 0, 2, 1));
    const auto [x, y] = split_channels(c, 3);
    EXPECT_EQ(x, a);
    EXPECT_EQ(y, b);
    EXPECT_THROW(concat_channels(a, TD(Shape{2, 1, 4, 4})), InvalidArgument);
}

TEST(nn, backward_before_forward_throws) {
    Conv2d<double> conv("c", 1, 1, 3, 1, 1);
    EXPECT_THROW(conv.backward(TD(Shape{1, 1, 2, 2})), StateError);
    BatchNorm2d<double> bn("bn", 1);
    EXPECT_THROW(bn.backward(TD(Shape{1, 1, 2, 2})), StateError);
    HybridNetwork<double> net({FrontEnd::Classical, 0.125, {}, 0});
    EXPECT_THROW(net.backward(TD(Shape{1, 1, 8, 8})), StateError);
}

TEST(nn, adam_zero_gradient_leaves_parameters) {
    Parameter<double> p("p", Shape{1, 1, 2, 2});
    p.value.fill(0.7);
    std::vector<Parameter<double>*> ps{&p};
    auto st = make_adam_state<double>(ps);
    for (int i = 0; i < 5; ++i) adam_step<double>(ps, st);
    for (const double v : p.value.values()) EXPECT_EQ(v, 0.7);
    EXPECT_EQ(st.step, 5);
}

TEST(nn, adam_first_step_closed_form) {
    Parameter<double> p("p", Shape{1, 1, 1, 3});
    p.value = TD(Shape{1, 1, 1, 3}, std::vector<double>{1.0, -2.0, 0.5});
    p.grad = TD(Shape{1, 1, 1, 3}, std::vector<double>{0.3, -4.0, 1e-3});
    std::vector<Parameter<double>*> ps{&p};
    auto st = make_adam_state<double>(ps);
    adam_step<double>(ps, st);
    // Bias-corrected moments give mhat = g and vhat = g^2, so each step is lr * g / (|g| + eps).
    const std::vector<double> g{0.3, -4.0, 1e-3}, v0{1.0, -2.0, 0.5};
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p.value[i], v0[i] - 1e-3 * g[i] / (std::abs(g[i]) + 1e-8), 1e-12);
}

TEST(nn, parameter_count_matches_layer_table) {
    // Independent tally of the layer list at widths 16/32/64/128/256.
    const std::size_t block = 2;  // batch norm gamma and beta per channel
    auto cb = [&](int in, int out) { return conv_params(in, out, 3) + block * static_cast<std::size_t>(out); };
    auto tconv = [](int in, int out) { return static_cast<std::size_t>(in) * out * 4 + out; };
    const std::size_t body = cb(1, 16) + cb(16, 16) + cb(16, 32) + cb(32, 32) + cb(32, 64) + cb(64, 128) +
                             cb(128, 256) + tconv(256, 128) + cb(160, 128) + cb(128, 64) + tconv(64, 32) +
                             cb(48, 32) + cb(32, 16) + tconv(16, 16) + cb(16, 16) + conv_params(16, 1, 1);
    EXPECT_EQ(body, 825009u);

    HybridNetwork<double> q({FrontEnd::Quantum, 1.0, {}, 0});
    HybridNetwork<double> c({FrontEnd::Classical, 1.0, {}, 0});
    EXPECT_EQ(q.parameter_count(), 825009u);
    EXPECT_EQ(c.parameter_count(), 825009u + conv_params(1, 1, 2));
}

TEST(nn, width_scaling) {
    HybridNetwork<float> n({FrontEnd::Quantum, 0.25, {}, 0});
    auto cb = [](int in, int out) { return conv_params(in, out, 3) + 2 * static_cast<std::size_t>(out); };
    auto tconv = [](int in, int out) { return static_cast<std::size_t>(in) * out * 4 + out; };
    const std::size_t expected = cb(1, 4) + cb(4, 4) + cb(4, 8) + cb(8, 8) + cb(8, 16) + cb(16, 32) + cb(32, 64) +
                                 tconv(64, 32) + cb(40, 32) + cb(32, 16) + tconv(16, 8) + cb(12, 8) + cb(8, 4) +
                                 tconv(4, 4) + cb(4, 4) + conv_params(4, 1, 1);
    EXPECT_EQ(n.parameter_count(), expected);
    EXPECT_THROW(HybridNetwork<float>({FrontEnd::Quantum, 0.0, {}, 0}), InvalidArgument);

    qsim::CircuitConfig four;
    four.readout = qsim::Readout::PerQubitZ;
    HybridNetwork<float> wide({FrontEnd::Quantum, 1.0, four, 0});
    EXPECT_EQ(wide.parameter_count(), 825009u + 3u * 16u * 9u);
}

TEST(nn, network_shape_law) {
    Rng rng(9);
    for (const auto fe : {FrontEnd::Quantum, FrontEnd::Classical}) {
        HybridNetwork<float> net({fe, 0.125, {}, 1});
        for (const auto& [h, w] : {std::pair{8, 8}, std::pair{16, 24}, std::pair{128, 128}}) {
            const auto x = rand_uniform<float>(Shape{2, 1, h, w}, rng);
            EXPECT_EQ(net.forward(x).shape(), (Shape{2, 1, h, w}));
        }
        EXPECT_THROW(net.forward(Tensor<float>(Shape{1, 1, 12, 8})), InvalidArgument);
    }
}

TEST(nn, network_end_to_end_gradient) {
    Rng rng(10);
    HybridNetwork<double> net({FrontEnd::Classical, 0.125, {}, 3});
    auto x = rand_uniform<double>(Shape{2, 1, 16, 16}, rng);
    const auto target = rand_uniform<double>(x.shape(), rng);
    auto loss = [&] { return mse_loss(net.forward(x), target).loss; };
    net.zero_grad();
    const auto res = mse_loss(net.forward(x), target);
    net.backward(res.grad);

    std::vector<GradBlock<double>> blocks;
    for (auto* p : net.parameters()) blocks.push_back({p->name, p->value.span(), as_vector(p->grad)});
    GradCheckOptions opt;
    opt.epsilon = 1e-6;
    opt.max_per_block = 6;
    opt.seed = 11;
    const auto rep = gradient_check<double>(loss, blocks, opt);
    std::cout << "network gradient check: " << rep.blocks.size() << " blocks, worst relative error " << rep.worst()
              << "\n";
    EXPECT_TRUE(rep.passed());

    // Negative control: a corrupted analytic gradient must be caught.
    blocks[3].analytic[0] += 0.5 * std::abs(blocks[3].analytic[0]) + 1e-3;
    std::vector<GradBlock<double>> one{blocks[3]};
    GradCheckOptions all;
    EXPECT_FALSE(gradient_check<double>(loss, one, all).passed());
}

TEST(nn, layer_chain_gradient) {
    Rng rng(12);
    Conv2d<double> c1("c1", 2, 3, 3, 1, 1);
    BatchNorm2d<double> bn("bn", 3);
    ReLU<double> relu;
    c1.init(rng);
    TD x = randn<double>(Shape{2, 2, 4, 4}, rng);
    const TD r = randn<double>(Shape{2, 3, 4, 4}, rng);
    auto fwd = [&] { return relu.forward(bn.forward(c1.forward(x))); };
    fwd();
    c1.weight().zero_grad();
    const TD gx = c1.backward(bn.backward(relu.backward(r)));
    std::vector<GradBlock<double>> blocks{{"x", x.span(), as_vector(gx)},
                                          {"w", c1.weight().value.span(), as_vector(c1.weight().grad)}};
    EXPECT_LT(gradient_check<double>([&] { return dot(fwd(), r); }, blocks).worst(), 1e-4);
}

TEST(nn, eval_mode_is_deterministic_and_seeded) {
    Rng rng(13);
    const auto x = rand_uniform<double>(Shape{2, 1, 16, 16}, rng);
    HybridNetwork<double> a({FrontEnd::Quantum, 0.25, {}, 5});
    HybridNetwork<double> b({FrontEnd::Quantum, 0.25, {}, 5});
    HybridNetwork<double> c({FrontEnd::Quantum, 0.25, {}, 6});
    a.set_training(false);
    b.set_training(false);
    c.set_training(false);
    const auto ya = a.forward(x);
    EXPECT_EQ(ya, a.forward(x));
    EXPECT_EQ(ya, b.forward(x));
    EXPECT_NE(ya, c.forward(x));
    EXPECT_THROW(HybridNetwork<double>({FrontEnd::Classical, 0.25, {}, 0}).forward_features(TD(Shape{1, 1, 4, 4})),
                 InvalidArgument);
}

TEST(nn, nan_propagates_through_relu_and_pool) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ReLU<double> relu;
    EXPECT_TRUE(std::isnan(relu.forward(TD(Shape{1, 1, 1, 2}, std::vector<double>{nan, 1.0}))[0]));
    MaxPool2<double> pool;
    EXPECT_TRUE(std::isnan(pool.forward(TD(Shape{1, 1, 2, 2}, std::vector<double>{1.0, nan, 5.0, 2.0}))[0]));
}

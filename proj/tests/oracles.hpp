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

// Reference implementations used only by tests. They share no code with the
// library paths they check: dense Kronecker-product circuit unitaries, direct
// DFT summation, per-pixel loops.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

/// Row-major dense square matrix.
struct Dense {
    std::size_t n = 0;
    std::vector<cd> a;

    explicit Dense(std::size_t dim) : n(dim), a(dim * dim) {}
    cd& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
    cd operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }

    static Dense identity(std::size_t dim) {
        Dense m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Dense mul(const Dense& x, const Dense& y) {
    Dense out(x.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t k = 0; k < x.n; ++k)
            for (std::size_t j = 0; j < x.n; ++j) out(i, j) += x(i, k) * y(k, j);
    return out;
}

inline Dense kron(const Dense& x, const Dense& y) {
    Dense out(x.n * y.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.n; ++j)
            for (std::size_t k = 0; k < y.n; ++k)
                for (std::size_t l = 0; l < y.n; ++l) out(i * y.n + k, j * y.n + l) = x(i, j) * y(k, l);
    return out;
}

inline Dense ry(double t) {
    Dense m(2);
    m(0, 0) = std::cos(t / 2);
    m(0, 1) = -std::sin(t / 2);
    m(1, 0) = std::sin(t / 2);
    m(1, 1) = std::cos(t / 2);
    return m;
}

inline Dense rz(double p) {
    Dense m(2);
    m(0, 0) = std::exp(cd(0, -p / 2));
    m(1, 1) = std::exp(cd(0, p / 2));
    return m;
}

inline Dense pauli_z() {
    Dense m(2);
    m(0, 0) = 1;
    m(1, 1) = -1;
    return m;
}

/// Single-qubit gate g on `qubit` of an n-qubit register; qubit 0 is the leftmost Kronecker factor.
inline Dense embed(const Dense& g, int qubit, int n) {
    Dense out = qubit == 0 ? g : Dense::identity(2);
    for (int q = 1; q < n; ++q) out = kron(out, q == qubit ? g : Dense::identity(2));
    return out;
}

/// CNOT as |0><0| (x) I + |1><1| (x) X assembled from Kronecker products.
inline Dense cnot(int control, int target, int n) {
    Dense p0(2), p1(2), x(2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    x(0, 1) = 1;
    x(1, 0) = 1;
    auto build = [&](const Dense& on_control, const Dense& on_target) {
        Dense out(1);
        out(0, 0) = 1;
        for (int q = 0; q < n; ++q) {
            out = kron(out, q == control ? on_control : (q == target ? on_target : Dense::identity(2)));
        }
        return out;
    };
    Dense a = build(p0, Dense::identity(2));
    Dense b = build(p1, x);
    for (std::size_t i = 0; i < a.a.size(); ++i) a.a[i] += b.a[i];
    return a;
}

inline std::vector<cd> apply(const Dense& m, const std::vector<cd>& v) {
    std::vector<cd> out(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) out[i] += m(i, j) * v[j];
    return out;
}

inline double expect(const Dense& obs, const std::vector<cd>& v) {
    const auto w = oracle::apply(obs, v);
    cd s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::conj(v[i]) * w[i];
    return s.real();
}

/// Full kernel circuit as one dense unitary: RY/RZ per qubit, chain CNOTs, optional ring closure.
inline Dense circuit_unitary(const double (&ry_angles)[4], const double (&rz_angles)[4], bool ring) {
    Dense u = Dense::identity(16);
    for (int q = 0; q < 4; ++q) {
        u = mul(embed(ry(ry_angles[q]), q, 4), u);
        u = mul(embed(rz(rz_angles[q]), q, 4), u);
    }
    for (int q = 0; q < 3; ++q) u = mul(cnot(q, q + 1, 4), u);
    if (ring) u = mul(cnot(3, 0, 4), u);
    return u;
}

/// Per-qubit <Z> of U|0000>.
inline std::vector<double> circuit_z(const Dense& u) {
    std::vector<cd> e0(16);
    e0[0] = 1;
    const auto psi = oracle::apply(u, e0);
    std::vector<double> z;
    for (int q = 0; q < 4; ++q) z.push_back(expect(embed(pauli_z(), q, 4), psi));
    return z;
}

/// Centered unitary DFT by direct summation: X[k] = sum_x x[n] e^{-2 pi i (k-K/2)(n-N/2)/N} / sqrt(HW).
inline std::vector<cd> dft2c(const std::vector<cd>& x, int h, int w, int sign = -1) {
    std::vector<cd> out(x.size());
    const double norm = 1.0 / std::sqrt(static_cast<double>(h) * w);
    for (int ku = 0; ku < h; ++ku)
        for (int kv = 0; kv < w; ++kv) {
            cd s = 0;
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    const double ph = sign * 2.0 * std::numbers::pi *
                                      ((static_cast<double>(ku - h / 2) * (r - h / 2)) / h +
                                       (static_cast<double>(kv - w / 2) * (c - w / 2)) / w);
                    s += x[static_cast<std::size_t>(r * w + c)] * std::exp(cd(0, ph));
                }
            out[static_cast<std::size_t>(ku * w + kv)] = s * norm;
        }
    return out;
}

}  // namespace oracle

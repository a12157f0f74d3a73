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

// Exact statevector simulation of small qubit registers, sized for the
// 4-qubit quanvolution kernel. Qubit 0 is the most significant bit of the
// basis index.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/image.hpp"

namespace qmri::qsim {

inline constexpr int kMinQubits = 1;
inline constexpr int kMaxQubits = 8;
inline constexpr int kKernelQubits = 4;

enum class Entanglement { Chain, Ring };
enum class Readout { MeanZ, PerQubitZ };

struct CircuitConfig {
    Entanglement entanglement = Entanglement::Chain;
    Readout readout = Readout::MeanZ;
    double angle_scale = 1.0;

    int output_channels() const { return readout == Readout::MeanZ ? 1 : kKernelQubits; }

    void validate() const {
        if (!(angle_scale > 0.0) || !std::isfinite(angle_scale)) {
            throw InvalidArgument("angle_scale must be a finite positive number");
        }
    }

    bool operator==(const CircuitConfig&) const = default;
};

inline const char* to_string(Entanglement e) { return e == Entanglement::Chain ? "chain" : "ring"; }
inline const char* to_string(Readout r) { return r == Readout::MeanZ ? "mean-z" : "per-qubit-z"; }

inline Entanglement parse_entanglement(const std::string& s) {
    if (s == "chain") return Entanglement::Chain;
    if (s == "ring") return Entanglement::Ring;
    throw InvalidArgument("unknown entanglement topology '" + s + "' (expected chain|ring)");
}

inline Readout parse_readout(const std::string& s) {
    if (s == "mean-z") return Readout::MeanZ;
    if (s == "per-qubit-z") return Readout::PerQubitZ;
    throw InvalidArgument("unknown readout '" + s + "' (expected mean-z|per-qubit-z)");
}

class StateVector {
  public:
    /// Ground state |0...0> on n qubits.
    explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < kMinQubits || num_qubits > kMaxQubits) {
            throw InvalidArgument("qubit count " + std::to_string(num_qubits) + " outside [1, 8]");
        }
        amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
        amplitudes_[0] = Complex{1.0, 0.0};
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    const Complex& operator[](std::size_t k) const { return amplitudes_[k]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s;
    }

    /// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    StateVector& ry(int qubit, double theta) {
        const std::size_t bit = bit_of(qubit);
        const double c = std::cos(0.5 * theta);
        const double s = std::sin(0.5 * theta);
        for (std::size_t k = 0; k < amplitudes_.size(); ++k) {
            if (k & bit) continue;
            const Complex a0 = amplitudes_[k];
            const Complex a1 = amplitudes_[k | bit];
            amplitudes_[k] = c * a0 - s * a1;
            amplitudes_[k | bit] = s * a0 + c * a1;
        }
        return *this;
    }

    /// RZ(phi) = diag(e^{-i phi/2}, e^{+i phi/2}).
    StateVector& rz(int qubit, double phi) {
        const std::size_t bit = bit_of(qubit);
        const Complex lo = std::polar(1.0, -0.5 * phi);
        const Complex hi = std::polar(1.0, 0.5 * phi);
        for (std::size_t k = 0; k < amplitudes_.size(); ++k) {
            amplitudes_[k] *= (k & bit) ? hi : lo;
        }
        return *this;
    }

    StateVector& cnot(int control, int target) {
        if (control == target) {
            throw InvalidArgument("CNOT control and target must differ");
        }
        const std::size_t cbit = bit_of(control);
        const std::size_t tbit = bit_of(target);
        for (std::size_t k = 0; k < amplitudes_.size(); ++k) {
            if ((k & cbit) && !(k & tbit)) std::swap(amplitudes_[k], amplitudes_[k | tbit]);
        }
        return *this;
    }

    /// <Z> on one qubit: sum of |amp|^2 signed +1 for bit 0, -1 for bit 1.
    double expect_z(int qubit) const {
        const std::size_t bit = bit_of(qubit);
        double e = 0.0;
        for (std::size_t k = 0; k < amplitudes_.size(); ++k) {
            const double p = std::norm(amplitudes_[k]);
            e += (k & bit) ? -p : p;
        }
        return e;
    }

  private:
    std::size_t bit_of(int qubit) const {
        if (qubit < 0 || qubit >= num_qubits_) {
            throw InvalidArgument("qubit index " + std::to_string(qubit) + " out of range for " +
                                  std::to_string(num_qubits_) + " qubits");
        }
        return std::size_t{1} << (num_qubits_ - 1 - qubit);
    }

    int num_qubits_;
    std::vector<Complex> amplitudes_;
};

// Value-semantics wrappers: state in, new state out.

inline StateVector state_init(int num_qubits) { return StateVector(num_qubits); }

inline StateVector apply_ry(StateVector state, int qubit, double theta) {
    state.ry(qubit, theta);
    return state;
}

inline StateVector apply_rz(StateVector state, int qubit, double phi) {
    state.rz(qubit, phi);
    return state;
}

inline StateVector apply_cnot(StateVector state, int control, int target) {
    state.cnot(control, target);
    return state;
}

inline double expect_z(const StateVector& state, int qubit) { return state.expect_z(qubit); }

/// (RY angle, RZ angle) for one qubit.
struct AnglePair {
    double ry = 0.0;
    double rz = 0.0;
};

/// Runs the fixed kernel circuit: per-qubit RY then RZ, CNOT entanglement, Z readout.
/// Returns 1 value (mean-Z) or 4 values (per-qubit-Z).
inline std::vector<double> run_patch_circuit(std::span<const AnglePair> angles, const CircuitConfig& config) {
    if (angles.size() != static_cast<std::size_t>(kKernelQubits)) {
        throw InvalidArgument("patch circuit expects 4 angle pairs, got " + std::to_string(angles.size()));
    }
    config.validate();
    StateVector state(kKernelQubits);
    for (int q = 0; q < kKernelQubits; ++q) {
        const auto& a = angles[static_cast<std::size_t>(q)];
        if (!std::isfinite(a.ry) || !std::isfinite(a.rz)) {
            throw InvalidArgument("non-finite rotation angle");
        }
        state.ry(q, a.ry * config.angle_scale).rz(q, a.rz * config.angle_scale);
    }
    for (int q = 0; q + 1 < kKernelQubits; ++q) state.cnot(q, q + 1);
    if (config.entanglement == Entanglement::Ring) state.cnot(kKernelQubits - 1, 0);

    std::array<double, kKernelQubits> z{};
    for (int q = 0; q < kKernelQubits; ++q) z[static_cast<std::size_t>(q)] = state.expect_z(q);
    if (config.readout == Readout::PerQubitZ) return {z.begin(), z.end()};
    return {(z[0] + z[1] + z[2] + z[3]) / kKernelQubits};
}

}  // namespace qmri::qsim

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

// Run configuration: one flat set of keys shared by training, evaluation,
// comparison, and the quanvolution front end. Files are key=value text;
// unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/io.hpp"
#include "qmri/mri.hpp"
#include "qmri/nn/network.hpp"
#include "qmri/qsim.hpp"

namespace qmri {

inline constexpr const char* kToolVersion = "qmri 0.1.0";

enum class Precision { Double, Float };

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct TrainConfig {
    // undersampling
    double accel = 4.0;
    double center_fraction = 0.0;  // 0 = default for the acceleration
    std::uint64_t mask_seed = 1;
    bool per_slice_masks = false;

    // model and optimizer
    nn::FrontEnd front_end = nn::FrontEnd::Quantum;
    double width_scale = 1.0;
    int epochs = 50;
    int batch_size = 4;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    Precision precision = Precision::Double;

    // quanvolution
    qsim::CircuitConfig circuit{};
    int quant_levels = 0;  // 0 = exact circuit per patch
    bool precompute_quanv = true;

    // data
    int image_size = 64;
    int coils = 4;
    int ellipses = 10;
    std::uint64_t phantom_seed = 1234;
    int train_slices = 32;
    int test_slices = 8;
    std::string data_dir;  // empty = synthetic phantoms

    // comparison and output
    std::vector<double> compare_accels{2.0, 4.0};
    std::string output_dir = "runs/default";

    double effective_center_fraction() const {
        return center_fraction > 0.0 ? center_fraction : mri::default_center_fraction(accel);
    }

    nn::NetworkConfig network_config() const { return {front_end, width_scale, circuit, seed}; }

    void validate() const {
        if (!(accel >= 1.0)) throw InvalidArgument("accel must be >= 1");
        if (center_fraction < 0.0 || center_fraction >= 1.0) throw InvalidArgument("center_fraction must be in [0, 1)");
        if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
        if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
        if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
        if (!(width_scale > 0.0)) throw InvalidArgument("width_scale must be > 0");
        if (quant_levels != 0 && quant_levels < 2) throw InvalidArgument("quant_levels must be 0 or >= 2");
        if (image_size < 16 || image_size % 8 != 0) throw InvalidArgument("image_size must be a multiple of 8, >= 16");
        if (coils < 1) throw InvalidArgument("coils must be >= 1");
        if (ellipses < 1) throw InvalidArgument("ellipses must be >= 1");
        if (train_slices < 0 || test_slices < 0) throw InvalidArgument("slice counts must be >= 0");
        if (compare_accels.empty()) throw InvalidArgument("compare_accels must list at least one acceleration");
        circuit.validate();
    }

    io::KeyValues to_key_values() const {
        io::KeyValues kv;
        kv["accel"] = format_double(accel);
        kv["center_fraction"] = center_fraction > 0.0 ? format_double(center_fraction) : "auto";
        kv["mask_seed"] = std::to_string(mask_seed);
        kv["per_slice_masks"] = per_slice_masks ? "true" : "false";
        kv["front_end"] = nn::to_string(front_end);
        kv["width_scale"] = format_double(width_scale);
        kv["epochs"] = std::to_string(epochs);
        kv["batch_size"] = std::to_string(batch_size);
        kv["lr"] = format_double(lr);
        kv["seed"] = std::to_string(seed);
        kv["precision"] = precision == Precision::Double ? "double" : "float";
        kv["readout"] = qsim::to_string(circuit.readout);
        kv["topology"] = qsim::to_string(circuit.entanglement);
        kv["angle_scale"] = format_double(circuit.angle_scale);
        kv["quant_levels"] = std::to_string(quant_levels);
        kv["precompute_quanv"] = precompute_quanv ? "true" : "false";
        kv["image_size"] = std::to_string(image_size);
        kv["coils"] = std::to_string(coils);
        kv["ellipses"] = std::to_string(ellipses);
        kv["phantom_seed"] = std::to_string(phantom_seed);
        kv["train_slices"] = std::to_string(train_slices);
        kv["test_slices"] = std::to_string(test_slices);
        kv["data_dir"] = data_dir;
        std::string accels;
        for (std::size_t i = 0; i < compare_accels.size(); ++i) {
            accels += (i ? "," : "") + format_double(compare_accels[i]);
        }
        kv["compare_accels"] = accels;
        kv["output_dir"] = output_dir;
        return kv;
    }

    static TrainConfig from_key_values(const io::KeyValues& kv) {
        TrainConfig c;
        for (const auto& [key, value] : kv) c.set(key, value);
        c.validate();
        return c;
    }

    /// Canonical text: every key, sorted.
    std::string resolved_text() const { return io::format_key_values(to_key_values()); }
    std::uint64_t hash() const { return io::fnv1a64(resolved_text()); }

    /// Hash of the keys that determine the evaluation data and front-end features.
    std::uint64_t data_hash() const {
        const auto kv = to_key_values();
        std::string text;
        for (const char* k : {"accel", "center_fraction", "mask_seed", "per_slice_masks", "image_size", "coils",
                              "ellipses", "phantom_seed", "test_slices", "data_dir", "readout", "topology",
                              "angle_scale", "quant_levels"}) {
            text += std::string(k) + "=" + kv.at(k) + "\n";
        }
        return io::fnv1a64(text);
    }

    void set(const std::string& key, const std::string& value) {
        try {
            if (key == "accel") accel = strict_double(value);
            else if (key == "center_fraction") center_fraction = value == "auto" ? 0.0 : strict_double(value);
            else if (key == "mask_seed") mask_seed = strict_u64(value);
            else if (key == "per_slice_masks") per_slice_masks = parse_bool(key, value);
            else if (key == "front_end") front_end = nn::parse_front_end(value);
            else if (key == "width_scale") width_scale = strict_double(value);
            else if (key == "epochs") epochs = strict_int(value);
            else if (key == "batch_size") batch_size = strict_int(value);
            else if (key == "lr") lr = strict_double(value);
            else if (key == "seed") seed = strict_u64(value);
            else if (key == "precision") precision = parse_precision(value);
            else if (key == "readout") circuit.readout = qsim::parse_readout(value);
            else if (key == "topology") circuit.entanglement = qsim::parse_entanglement(value);
            else if (key == "angle_scale") circuit.angle_scale = strict_double(value);
            else if (key == "quant_levels") quant_levels = strict_int(value);
            else if (key == "precompute_quanv") precompute_quanv = parse_bool(key, value);
            else if (key == "image_size") image_size = strict_int(value);
            else if (key == "coils") coils = strict_int(value);
            else if (key == "ellipses") ellipses = strict_int(value);
            else if (key == "phantom_seed") phantom_seed = strict_u64(value);
            else if (key == "train_slices") train_slices = strict_int(value);
            else if (key == "test_slices") test_slices = strict_int(value);
            else if (key == "data_dir") data_dir = value;
            else if (key == "compare_accels") compare_accels = parse_list(value);
            else if (key == "output_dir") output_dir = value;
            else throw FormatError("unknown config key '" + key + "'");
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const InvalidArgument*>(&e)) throw;
            throw FormatError("bad value '" + value + "' for config key '" + key + "'");
        }
    }

  private:
    // Whole-string numeric parses; partial matches such as "4x" are errors.
    static double strict_double(const std::string& v) {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    }
    static int strict_int(const std::string& v) {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    }
    static std::uint64_t strict_u64(const std::string& v) {
        std::size_t used = 0;
        if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
        const auto u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    }

    static bool parse_bool(const std::string& key, const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw FormatError("config key '" + key + "' expects true|false, got '" + v + "'");
    }

    static Precision parse_precision(const std::string& v) {
        if (v == "double") return Precision::Double;
        if (v == "float") return Precision::Float;
        throw InvalidArgument("precision must be double|float, got '" + v + "'");
    }

    static std::vector<double> parse_list(const std::string& v) {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos <= v.size()) {
            const auto comma = v.find(',', pos);
            const auto item = io::trim(std::string_view(v).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (!item.empty()) out.push_back(strict_double(item));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    }
};

inline TrainConfig load_config(const std::filesystem::path& path) {
    return TrainConfig::from_key_values(io::parse_key_values(io::read_file(path)));
}

}  // namespace qmri

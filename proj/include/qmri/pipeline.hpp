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

// Dataset preparation, training, evaluation and the two-arm comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qmri/config.hpp"
#include "qmri/errors.hpp"
#include "qmri/image.hpp"
#include "qmri/io.hpp"
#include "qmri/metrics.hpp"
#include "qmri/mri.hpp"
#include "qmri/nn/adam.hpp"
#include "qmri/nn/layers.hpp"
#include "qmri/nn/network.hpp"
#include "qmri/quanv.hpp"
#include "qmri/rng.hpp"

namespace qmri::pipeline {

namespace fs = std::filesystem;

enum class Split { Train, Test };

inline const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

/// Normalized zero-filled input and the equally scaled fully sampled target.
struct SamplePair {
    Image input;
    Image target;
    double scale = 1.0;
    std::size_t mask_index = 0;
};

struct Dataset {
    std::vector<SamplePair> pairs;
    std::vector<mri::SamplingMask> masks;
    /// Masked multicoil k-space behind each input (unnormalized).
    std::vector<mri::KSpaceVolume> undersampled;
    /// Quantum front-end output per pair; empty until attach_quantum_features().
    std::vector<quanv::FeatureMap> features;

    std::size_t size() const { return pairs.size(); }
    const mri::SamplingMask& mask_for(std::size_t i) const { return masks[pairs[i].mask_index]; }
};

inline std::uint64_t slice_seed(std::uint64_t base, Split split, std::size_t index) {
    return derive_seed(derive_seed(base, split == Split::Train ? 1 : 2), index);
}

/// Fully sampled multicoil k-space for every slice of one split.
inline std::vector<mri::KSpaceVolume> load_kspace(const TrainConfig& config, Split split) {
    std::vector<mri::KSpaceVolume> out;
    if (config.data_dir.empty()) {
        const int count = split == Split::Train ? config.train_slices : config.test_slices;
        for (int i = 0; i < count; ++i) {
            mri::PhantomSpec spec;
            spec.n_ellipses = config.ellipses;
            spec.coil_count = config.coils;
            spec.height = config.image_size;
            spec.width = config.image_size;
            spec.seed = slice_seed(config.phantom_seed, split, static_cast<std::size_t>(i));
            out.push_back(mri::phantom_generate(spec).fully_sampled);
        }
        return out;
    }
    // Imported data: <data_dir>/<split>/*_kspace.qmrt (coils x H x W, power-of-two)
    // or *_coils.qmrt (coil images, any size; zero-padded to the next power of two).
    const fs::path dir = fs::path(config.data_dir) / to_string(split);
    if (!fs::is_directory(dir)) throw InvalidArgument("missing data directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.ends_with("_kspace.qmrt") || name.ends_with("_coils.qmrt")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto coils = io::tensor_coils(io::read_tensor(f));
        if (f.filename().string().ends_with("_coils.qmrt")) {
            for (auto& c : coils) {
                const int h = static_cast<int>(std::bit_ceil(static_cast<unsigned>(c.height)));
                const int w = static_cast<int>(std::bit_ceil(static_cast<unsigned>(c.width)));
                c = mri::fft2c(mri::pad_or_crop(c, h, w));
            }
        }
        out.emplace_back(std::move(coils));
    }
    return out;
}

/// Undersample, zero-fill, coil-combine and normalize every slice of a split.
inline Dataset prepare_dataset(const TrainConfig& config, Split split) {
    config.validate();
    const auto volumes = load_kspace(config, split);
    if (volumes.empty()) throw InvalidArgument(std::string("empty ") + to_string(split) + " dataset");
    Dataset ds;
    const double cf = config.effective_center_fraction();
    for (std::size_t i = 0; i < volumes.size(); ++i) {
        const auto& full = volumes[i];
        if (i == 0 || config.per_slice_masks) {
            const std::uint64_t mseed =
                config.per_slice_masks ? slice_seed(config.mask_seed, split, i) : config.mask_seed;
            ds.masks.push_back(
                config.accel <= 1.0 ? mri::full_mask(full.height(), full.width())
                                    : mri::make_cartesian_mask(full.height(), full.width(), config.accel, cf, mseed));
        }
        auto masked = mri::apply_mask(full, ds.masks.back());
        const auto zf = mri::zero_fill_recon(masked);
        const auto fully = mri::zero_fill_recon(full);
        const auto norm = mri::normalize(mri::sos_combine(zf));
        SamplePair pair;
        pair.input = norm.image;
        pair.scale = norm.scale;
        pair.target = mri::scale_image(mri::sos_combine(fully), 1.0 / norm.scale);
        pair.mask_index = ds.masks.size() - 1;
        ds.pairs.push_back(std::move(pair));
        ds.undersampled.push_back(std::move(masked));
    }
    return ds;
}

/// Disk cache key of one front-end evaluation: image bytes plus circuit settings.
inline std::string quanv_cache_key(const Image& image, const TrainConfig& config) {
    std::string blob = io::encode_tensor(io::image_tensor(image));
    blob += std::string("|") + qsim::to_string(config.circuit.readout) + "|" +
            qsim::to_string(config.circuit.entanglement) + "|" + format_double(config.circuit.angle_scale) + "|" +
            std::to_string(config.quant_levels);
    return io::hex64(io::fnv1a64(blob));
}

inline quanv::FeatureMap compute_features(const Image& image, const TrainConfig& config) {
    if (config.quant_levels >= 2) return quanv::quanvolve_cached(image, config.circuit, config.quant_levels);
    return quanv::quanvolve(image, config.circuit);
}

/// Computes (or loads from `<output_dir>/quanv_cache`) the fixed quantum features of every input.
inline void attach_quantum_features(Dataset& ds, const TrainConfig& config) {
    ds.features.clear();
    const bool use_disk = config.precompute_quanv && !config.output_dir.empty();
    const fs::path cache_dir = fs::path(config.output_dir) / "quanv_cache";
    for (const auto& pair : ds.pairs) {
        if (!use_disk) {
            ds.features.push_back(compute_features(pair.input, config));
            continue;
        }
        const fs::path file = cache_dir / (quanv_cache_key(pair.input, config) + ".qmrt");
        if (fs::exists(file)) {
            const auto t = io::read_tensor(file);
            if (t.dims.size() == 3) {
                quanv::FeatureMap fm{static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                                     static_cast<int>(t.dims[2]), io::real_values(t)};
                ds.features.push_back(std::move(fm));
                continue;
            }
        }
        auto fm = compute_features(pair.input, config);
        io::write_tensor(file, io::make_f64({static_cast<std::uint32_t>(fm.channels),
                                             static_cast<std::uint32_t>(fm.height),
                                             static_cast<std::uint32_t>(fm.width)},
                                            fm.values));
        ds.features.push_back(std::move(fm));
    }
}

// ---------------------------------------------------------------------------
// Models.

template <typename T>
struct Model {
    TrainConfig config;
    nn::HybridNetwork<T> net;
    nn::AdamState adam;

    explicit Model(const TrainConfig& c) : config(c), net(c.network_config()) {
        auto params = net.parameters();
        adam = nn::make_adam_state<T>(params, nn::AdamHyper{c.lr});
    }
};

namespace detail {

template <typename T>
nn::Tensor<T> image_batch(const Dataset& ds, std::span<const std::size_t> idx, bool targets) {
    const Image& first = targets ? ds.pairs[idx[0]].target : ds.pairs[idx[0]].input;
    nn::Tensor<T> out(nn::Shape{static_cast<int>(idx.size()), 1, first.height, first.width});
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const Image& img = targets ? ds.pairs[idx[b]].target : ds.pairs[idx[b]].input;
        std::transform(img.values.begin(), img.values.end(), out.sample(static_cast<int>(b)),
                       [](double v) { return static_cast<T>(v); });
    }
    return out;
}

template <typename T>
nn::Tensor<T> feature_batch(const Dataset& ds, std::span<const std::size_t> idx) {
    const auto& f0 = ds.features[idx[0]];
    nn::Tensor<T> out(nn::Shape{static_cast<int>(idx.size()), f0.channels, f0.height, f0.width});
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto& f = ds.features[idx[b]].values;
        std::transform(f.begin(), f.end(), out.sample(static_cast<int>(b)), [](double v) { return static_cast<T>(v); });
    }
    return out;
}

template <typename T>
nn::Tensor<T> model_forward(Model<T>& model, const Dataset& ds, std::span<const std::size_t> idx) {
    if (model.config.front_end == nn::FrontEnd::Quantum) {
        if (ds.features.size() != ds.size()) throw StateError("quantum front end needs attached features");
        return model.net.forward_features(feature_batch<T>(ds, idx));
    }
    return model.net.forward(image_batch<T>(ds, idx, false));
}

}  // namespace detail

template <typename T>
struct TrainResult {
    Model<T> model;
    std::vector<double> loss_history;
};

/// Minimizes mean MSE over the training pairs with Adam. Deterministic per seed.
template <typename T>
TrainResult<T> train(const TrainConfig& config, const Dataset& ds, std::ostream* log = nullptr) {
    if (ds.size() == 0) throw InvalidArgument("training needs at least one sample pair");
    TrainResult<T> result{Model<T>(config), {}};
    auto& model = result.model;
    auto params = model.net.parameters();
    model.net.set_training(true);

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, 0x5348));
    const auto batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::span<const std::size_t> idx(order.data() + start, std::min(batch, order.size() - start));
            model.net.zero_grad();
            const auto pred = detail::model_forward(model, ds, idx);
            const auto loss = nn::mse_loss(pred, detail::image_batch<T>(ds, idx, true));
            if (!std::isfinite(loss.loss)) {
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch + 1) +
                                   "; lower lr or check the input data for NaN/Inf");
            }
            model.net.backward(loss.grad);
            nn::adam_step<T>(params, model.adam);
            total += loss.loss * static_cast<double>(idx.size());
        }
        result.loss_history.push_back(total / static_cast<double>(ds.size()));
        if (log) {
            char line[96];
            std::snprintf(line, sizeof line, "epoch %4d/%d  loss %.6e\n", epoch + 1, config.epochs,
                          result.loss_history.back());
            *log << line << std::flush;
        }
    }
    model.net.set_training(false);
    return result;
}

/// Eval-mode reconstruction of one dataset entry.
template <typename T>
Image predict(Model<T>& model, const Dataset& ds, std::size_t i) {
    model.net.set_training(false);
    const std::size_t idx[1] = {i};
    const auto out = detail::model_forward(model, ds, idx);
    Image img(out.h(), out.w());
    std::transform(out.data(), out.data() + out.size(), img.values.begin(), [](T v) { return static_cast<double>(v); });
    return img;
}

// ---------------------------------------------------------------------------
// Metrics.

struct ImageMetrics {
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

inline ImageMetrics measure(const Image& prediction, const Image& target) {
    ImageMetrics m;
    m.mse = metrics::mse(prediction, target);
    m.psnr = metrics::psnr_from_mse(m.mse);
    m.ssim = metrics::ssim(prediction, target);
    return m;
}

struct MetricsReport {
    std::string model;
    double accel = 1.0;
    std::vector<ImageMetrics> per_image;

    ImageMetrics mean() const {
        ImageMetrics m;
        for (const auto& x : per_image) {
            m.mse += x.mse;
            m.psnr += x.psnr;
            m.ssim += x.ssim;
        }
        const auto n = static_cast<double>(std::max<std::size_t>(1, per_image.size()));
        return {m.mse / n, m.psnr / n, m.ssim / n};
    }
};

/// Zero-filled input scored against the target.
inline MetricsReport zero_filled_report(const Dataset& ds, double accel) {
    MetricsReport r{"zero_filled", accel, {}};
    for (const auto& p : ds.pairs) r.per_image.push_back(measure(p.input, p.target));
    return r;
}

/// Report label: "hybrid" for the quantum front end, "classical" otherwise.
inline std::string model_tag(nn::FrontEnd f) { return f == nn::FrontEnd::Quantum ? "hybrid" : "classical"; }

template <typename T>
MetricsReport evaluate(Model<T>& model, const Dataset& ds) {
    MetricsReport r{model_tag(model.config.front_end), model.config.accel, {}};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Image pred = predict(model, ds, i);
        if (!pred.same_shape(ds.pairs[i].target)) throw InvalidArgument("model output does not match target dims");
        r.per_image.push_back(measure(pred, ds.pairs[i].target));
    }
    return r;
}

inline std::string fmt_num(double v, int digits = 17) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Columns: model,accel,image,mse,psnr_db,ssim. One row per image, then a "mean" row per model.
inline std::string metrics_csv(const std::vector<MetricsReport>& reports) {
    std::string out = "model,accel,image,mse,psnr_db,ssim\n";
    for (const auto& r : reports) {
        auto row = [&](const std::string& image, const ImageMetrics& m) {
            out += r.model + "," + fmt_num(r.accel) + "," + image + "," + fmt_num(m.mse) + "," + fmt_num(m.psnr) +
                   "," + fmt_num(m.ssim) + "\n";
        };
        for (std::size_t i = 0; i < r.per_image.size(); ++i) row(std::to_string(i), r.per_image[i]);
        row("mean", r.mean());
    }
    return out;
}

inline std::string loss_csv(const std::vector<double>& history) {
    std::string out = "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i + 1) + "," + fmt_num(history[i]) + "\n";
    return out;
}

inline std::string accel_tag(double r) { return fmt_num(r, 6) + "x"; }

/// Rows MSE/PSNR/SSIM; columns classical_<R>x, hybrid_<R>x per acceleration.
struct ComparisonTable {
    std::vector<double> accels;
    std::vector<MetricsReport> classical, hybrid, zero_filled;

    std::string table1_csv() const {
        std::string out = "metric";
        for (const double r : accels) out += ",classical_" + accel_tag(r) + ",hybrid_" + accel_tag(r);
        out += "\n";
        auto row = [&](const char* name, auto field) {
            out += name;
            for (std::size_t k = 0; k < accels.size(); ++k) {
                out += "," + fmt_num(field(classical[k].mean()), 10) + "," + fmt_num(field(hybrid[k].mean()), 10);
            }
            out += "\n";
        };
        row("MSE", [](const ImageMetrics& m) { return m.mse; });
        row("PSNR", [](const ImageMetrics& m) { return m.psnr; });
        row("SSIM", [](const ImageMetrics& m) { return m.ssim; });
        return out;
    }

    /// Long form including the zero-filled baseline: accel,model,mse,psnr_db,ssim.
    std::string summary_csv() const {
        std::string out = "accel,model,mse,psnr_db,ssim\n";
        for (std::size_t k = 0; k < accels.size(); ++k) {
            for (const auto* r : {&zero_filled[k], &classical[k], &hybrid[k]}) {
                const auto m = r->mean();
                out += fmt_num(accels[k], 6) + "," + r->model + "," + fmt_num(m.mse, 10) + "," + fmt_num(m.psnr, 10) +
                       "," + fmt_num(m.ssim, 10) + "\n";
            }
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Checkpoints.

template <typename T>
io::TensorFile to_tensor_file(const nn::Tensor<T>& t) {
    std::vector<double> v(t.values().begin(), t.values().end());
    const auto& s = t.shape();
    return io::make_f64({static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                         static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)},
                        v);
}

template <typename T>
void assign_from(nn::Tensor<T>& dst, const io::TensorFile& src, const std::string& name) {
    const auto v = io::real_values(src);
    if (v.size() != dst.size()) throw FormatError("checkpoint entry '" + name + "' has the wrong size");
    std::transform(v.begin(), v.end(), dst.data(), [](double x) { return static_cast<T>(x); });
}

template <typename T>
io::Checkpoint make_checkpoint(Model<T>& model) {
    io::Checkpoint ck;
    ck.config_text = model.config.resolved_text();
    ck.config_hash = io::fnv1a64(ck.config_text);
    ck.optimizer_step = model.adam.step;
    const auto params = model.net.parameters();
    for (const auto* p : params) ck.entries.emplace_back(p->name, to_tensor_file(p->value));
    for (const auto& b : model.net.buffers()) ck.entries.emplace_back(b.name, to_tensor_file(*b.tensor));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto dims = to_tensor_file(params[k]->value).dims;
        ck.entries.emplace_back("adam.m:" + params[k]->name, io::make_f64(dims, model.adam.first_moment[k]));
        ck.entries.emplace_back("adam.v:" + params[k]->name, io::make_f64(dims, model.adam.second_moment[k]));
    }
    return ck;
}

inline TrainConfig checkpoint_config(const io::Checkpoint& ck) {
    return TrainConfig::from_key_values(io::parse_key_values(ck.config_text));
}

template <typename T>
Model<T> load_model(const io::Checkpoint& ck) {
    Model<T> model(checkpoint_config(ck));
    auto need = [&](const std::string& name) -> const io::TensorFile& {
        const auto* t = ck.find(name);
        if (!t) throw FormatError("checkpoint is missing entry '" + name + "'");
        return *t;
    };
    const auto params = model.net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto* p = params[k];
        assign_from(p->value, need(p->name), p->name);
        model.adam.first_moment[k] = io::real_values(need("adam.m:" + p->name));
        model.adam.second_moment[k] = io::real_values(need("adam.v:" + p->name));
        if (model.adam.first_moment[k].size() != p->value.size() || model.adam.second_moment[k].size() != p->value.size()) {
            throw FormatError("optimizer state for '" + p->name + "' has the wrong size");
        }
    }
    for (auto& b : model.net.buffers()) assign_from(*b.tensor, need(b.name), b.name);
    model.adam.step = ck.optimizer_step;
    model.net.set_training(false);
    return model;
}

/// Resolved config plus tool version, written into every artifact directory.
inline void write_run_manifest(const fs::path& dir, const TrainConfig& config) {
    std::string text = "# " + std::string(kToolVersion) + "\n# config_hash=" + io::hex64(config.hash()) + "\n" +
                       config.resolved_text();
    io::write_file_atomic(dir / "config.resolved", text);
}

// ---------------------------------------------------------------------------
// Experiments.

/// Keys that may differ between the two arms of a comparison.
inline void check_arms_match(const TrainConfig& a, const TrainConfig& b) {
    auto ka = a.to_key_values();
    auto kb = b.to_key_values();
    ka.erase("front_end");
    kb.erase("front_end");
    ka.erase("output_dir");
    kb.erase("output_dir");
    for (const auto& [k, v] : ka) {
        if (kb.at(k) != v) throw InvalidArgument("comparison arms differ in '" + k + "': " + v + " vs " + kb.at(k));
    }
}

struct TrainRunOutput {
    std::vector<double> loss_history;
    MetricsReport train_report;
    MetricsReport test_report;
    MetricsReport zero_filled_test;
    fs::path checkpoint;
};

template <typename T>
TrainRunOutput train_and_save(const TrainConfig& config, Dataset& train_set, Dataset& test_set, const fs::path& dir,
                              std::ostream* log) {
    if (config.front_end == nn::FrontEnd::Quantum) {
        if (train_set.features.size() != train_set.size()) attach_quantum_features(train_set, config);
        if (test_set.size() && test_set.features.size() != test_set.size()) attach_quantum_features(test_set, config);
    }
    auto result = train<T>(config, train_set, log);
    TrainRunOutput out;
    out.loss_history = result.loss_history;
    out.train_report = evaluate(result.model, train_set);
    out.train_report.model += "_train";
    if (test_set.size()) {
        out.test_report = evaluate(result.model, test_set);
        out.zero_filled_test = zero_filled_report(test_set, config.accel);
    }
    fs::create_directories(dir);
    out.checkpoint = dir / "model.qmrc";
    io::write_checkpoint(out.checkpoint, make_checkpoint(result.model));
    io::write_file_atomic(dir / "loss.csv", loss_csv(result.loss_history));
    std::vector<MetricsReport> reports{out.train_report};
    if (test_set.size()) {
        reports.push_back(out.test_report);
        reports.push_back(out.zero_filled_test);
    }
    io::write_file_atomic(dir / "metrics.csv", metrics_csv(reports));
    write_run_manifest(dir, config);
    return out;
}

/// `train` command: trains one model on the configured data and writes its artifacts.
inline TrainRunOutput run_train(const TrainConfig& config, std::ostream* log = nullptr) {
    auto train_set = prepare_dataset(config, Split::Train);
    Dataset test_set;
    if (config.test_slices > 0 || !config.data_dir.empty()) test_set = prepare_dataset(config, Split::Test);
    const fs::path dir(config.output_dir);
    if (config.precision == Precision::Float) return train_and_save<float>(config, train_set, test_set, dir, log);
    return train_and_save<double>(config, train_set, test_set, dir, log);
}

template <typename T>
std::vector<Image> predict_all(Model<T>& model, Dataset& ds) {
    if (model.config.front_end == nn::FrontEnd::Quantum && ds.features.size() != ds.size()) {
        attach_quantum_features(ds, model.config);
    }
    std::vector<Image> out;
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(predict(model, ds, i));
    return out;
}

inline Image abs_error(const Image& a, const Image& b) {
    Image out(a.height, a.width);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = std::abs(a.values[i] - b.values[i]);
    return out;
}

template <typename T>
ComparisonTable compare_impl(const TrainConfig& config, std::ostream* log) {
    ComparisonTable table;
    const fs::path root(config.output_dir);
    for (const double r : config.compare_accels) {
        TrainConfig base = config;
        base.accel = r;
        TrainConfig classical = base;
        classical.front_end = nn::FrontEnd::Classical;
        TrainConfig hybrid = base;
        hybrid.front_end = nn::FrontEnd::Quantum;
        check_arms_match(classical, hybrid);

        auto train_set = prepare_dataset(base, Split::Train);
        auto test_set = prepare_dataset(base, Split::Test);
        const fs::path dir = root / ("R" + accel_tag(r));
        if (log) *log << "== R=" << r << " classical\n";
        auto c_out = train_and_save<T>(classical, train_set, test_set, dir / "classical", log);
        if (log) *log << "== R=" << r << " hybrid\n";
        auto h_out = train_and_save<T>(hybrid, train_set, test_set, dir / "hybrid", log);

        table.accels.push_back(r);
        table.classical.push_back(c_out.test_report);
        table.hybrid.push_back(h_out.test_report);
        table.zero_filled.push_back(c_out.zero_filled_test);

        // Figure panels for the first test slice.
        auto c_model = load_model<T>(io::read_checkpoint(c_out.checkpoint));
        auto h_model = load_model<T>(io::read_checkpoint(h_out.checkpoint));
        const Image c_img = predict(c_model, test_set, 0);
        const Image h_img = predict(h_model, test_set, 0);
        const auto& pair = test_set.pairs[0];
        const Image e_zf = abs_error(pair.input, pair.target);
        const Image e_c = abs_error(c_img, pair.target);
        const Image e_h = abs_error(h_img, pair.target);
        double err_peak = 0.0;
        for (const auto* e : {&e_zf, &e_c, &e_h}) {
            for (const double v : e->values) err_peak = std::max(err_peak, v);
        }
        const fs::path fig = dir / "figures";
        io::write_pgm(fig / "ground_truth.pgm", pair.target, 1.0);
        io::write_pgm(fig / "mask.pgm", test_set.mask_for(0).to_image(), 1.0);
        io::write_pgm(fig / "zero_filled.pgm", pair.input, 1.0);
        io::write_pgm(fig / "classical.pgm", c_img, 1.0);
        io::write_pgm(fig / "hybrid.pgm", h_img, 1.0);
        io::write_pgm(fig / "error_zero_filled.pgm", e_zf, err_peak);
        io::write_pgm(fig / "error_classical.pgm", e_c, err_peak);
        io::write_pgm(fig / "error_hybrid.pgm", e_h, err_peak);
    }
    io::write_file_atomic(root / "table1.csv", table.table1_csv());
    io::write_file_atomic(root / "summary.csv", table.summary_csv());
    write_run_manifest(root, config);
    return table;
}

/// `compare` command: classical vs quantum front end on identical data, per acceleration.
inline ComparisonTable run_compare(const TrainConfig& config, std::ostream* log = nullptr) {
    config.validate();
    if (config.precision == Precision::Float) return compare_impl<float>(config, log);
    return compare_impl<double>(config, log);
}

/// `eval` command. Refuses when the data settings differ from those the checkpoint was trained with.
inline std::vector<MetricsReport> run_eval(const io::Checkpoint& ck, const TrainConfig& data_config) {
    const TrainConfig model_config = checkpoint_config(ck);
    if (model_config.data_hash() != data_config.data_hash()) {
        throw InvalidArgument("refusing to evaluate: data config hash " + io::hex64(data_config.data_hash()) +
                              " does not match the checkpoint's " + io::hex64(model_config.data_hash()));
    }
    auto test_set = prepare_dataset(data_config, Split::Test);
    auto run = [&](auto model) {
        if (model.config.front_end == nn::FrontEnd::Quantum) attach_quantum_features(test_set, data_config);
        return std::vector<MetricsReport>{evaluate(model, test_set), zero_filled_report(test_set, data_config.accel)};
    };
    if (model_config.precision == Precision::Float) return run(load_model<float>(ck));
    return run(load_model<double>(ck));
}

/// `reconstruct` command: one normalized zero-filled image in, reconstruction out.
inline Image run_reconstruct(const io::Checkpoint& ck, const Image& input) {
    const TrainConfig config = checkpoint_config(ck);
    Dataset ds;
    ds.pairs.push_back({input, input, 1.0, 0});
    auto run = [&](auto model) {
        if (config.front_end == nn::FrontEnd::Quantum) ds.features.push_back(compute_features(input, config));
        return predict(model, ds, 0);
    };
    if (config.precision == Precision::Float) return run(load_model<float>(ck));
    return run(load_model<double>(ck));
}

}  // namespace qmri::pipeline

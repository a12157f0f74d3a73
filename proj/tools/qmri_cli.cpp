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

// qmri command-line tool.
//
// Exit codes: 0 success, 1 refusal or invalid argument, 2 usage, 3 file/config
// format error, 4 numeric failure (non-finite loss).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmri/qmri.hpp"

namespace fs = std::filesystem;
using namespace qmri;

namespace {

enum ExitCode { kOk = 0, kRefused = 1, kUsage = 2, kFormat = 3, kNumeric = 4 };

constexpr const char* kOutputRootEnv = "QMRI_OUTPUT_ROOT";

// Relative output directories land under $QMRI_OUTPUT_ROOT when it is set.
std::string resolve_output(const std::string& dir) {
    const char* root = std::getenv(kOutputRootEnv);
    if (!root || !*root || dir.empty() || fs::path(dir).is_absolute()) return dir;
    return (fs::path(root) / dir).string();
}

TrainConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides,
                            const std::optional<std::uint64_t>& seed) {
    auto kv = io::parse_key_values(io::read_file(path));
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw FormatError("--set expects key=value, got '" + o + "'");
        kv[io::trim(std::string_view(o).substr(0, eq))] = io::trim(std::string_view(o).substr(eq + 1));
    }
    auto config = TrainConfig::from_key_values(kv);
    if (seed) {
        config.seed = *seed;
        config.mask_seed = *seed;
        config.phantom_seed = *seed;
    }
    config.output_dir = resolve_output(config.output_dir);
    return config;
}

std::string join_lines(const mri::SamplingMask& m) {
    std::string out;
    for (int r = 0; r < m.height; ++r) {
        if (m.selected(r)) out += (out.empty() ? "" : " ") + std::to_string(r);
    }
    return out;
}

void print_report(const pipeline::MetricsReport& r) {
    const auto m = r.mean();
    std::printf("%-12s R=%-4g  mse %.6g  psnr %.4f dB  ssim %.4f  (%zu images)\n", r.model.c_str(), r.accel, m.mse,
                m.psnr, m.ssim, r.per_image.size());
}

Image read_real_image(const std::string& path) {
    const auto t = io::read_tensor(path);
    if (t.dtype != io::DType::F64 && t.dtype != io::DType::F32) {
        throw FormatError(path + ": expected a real (f32/f64) tensor, got " + io::to_string(t.dtype));
    }
    return io::tensor_image(t);
}

// ---------------------------------------------------------------------------

struct MaskArgs {
    int height = 0, width = 0;
    double accel = 4.0, center_frac = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_mask_gen(const MaskArgs& a) {
    const double cf = a.center_frac > 0.0 ? a.center_frac : mri::default_center_fraction(a.accel);
    const auto mask = a.accel == 1.0 ? mri::full_mask(a.height, a.width)
                                     : mri::make_cartesian_mask(a.height, a.width, a.accel, cf, a.seed);
    io::write_tensor(a.out, io::image_tensor(mask.to_image()));
    std::printf("mask %dx%d  R=%g (achieved %.4f)  center_fraction=%g  seed=%llu\n", a.height, a.width, a.accel,
                mask.achieved_acceleration(), cf, static_cast<unsigned long long>(a.seed));
    std::printf("selected %d/%d lines: %s\n", mask.selected_count(), a.height, join_lines(mask).c_str());
    return kOk;
}

struct QuanvArgs {
    std::string in, out, readout = "mean-z", topology = "chain";
    double angle_scale = 1.0;
};

int cmd_quanvolve(const QuanvArgs& a) {
    qsim::CircuitConfig c;
    c.readout = qsim::parse_readout(a.readout);
    c.entanglement = qsim::parse_entanglement(a.topology);
    c.angle_scale = a.angle_scale;
    c.validate();
    const auto fm = quanv::quanvolve(read_real_image(a.in), c);
    io::write_tensor(a.out, io::make_f64({static_cast<std::uint32_t>(fm.channels),
                                          static_cast<std::uint32_t>(fm.height),
                                          static_cast<std::uint32_t>(fm.width)},
                                         fm.values));
    std::printf("feature map %dx%dx%d -> %s\n", fm.channels, fm.height, fm.width, a.out.c_str());
    return kOk;
}

struct PhantomArgs {
    int coils = 4, ellipses = 10, size = 64, slices = 8;
    std::uint64_t seed = 1234;
    bool uniform = false, force = false;
    std::string out_dir;
};

int cmd_phantom(const PhantomArgs& a) {
    const fs::path dir(a.out_dir);
    if (fs::exists(dir) && !fs::is_empty(dir) && !a.force) {
        std::fprintf(stderr, "refusing to write into non-empty directory %s (pass --force)\n", a.out_dir.c_str());
        return kRefused;
    }
    fs::create_directories(dir);
    for (int i = 0; i < a.slices; ++i) {
        mri::PhantomSpec spec;
        spec.n_ellipses = a.ellipses;
        spec.coil_count = a.coils;
        spec.height = a.size;
        spec.width = a.size;
        spec.seed = derive_seed(a.seed, static_cast<std::uint64_t>(i));
        spec.uniform_sensitivity = a.uniform;
        const auto ph = mri::phantom_generate(spec);
        char stem[32];
        std::snprintf(stem, sizeof stem, "slice_%04d", i);
        io::write_tensor(dir / (std::string(stem) + "_gt.qmrt"), io::image_tensor(ph.ground_truth));
        io::write_tensor(dir / (std::string(stem) + "_kspace.qmrt"), io::coil_tensor(ph.fully_sampled.coils()));
    }
    io::KeyValues kv{{"coils", std::to_string(a.coils)},   {"ellipses", std::to_string(a.ellipses)},
                     {"size", std::to_string(a.size)},     {"slices", std::to_string(a.slices)},
                     {"seed", std::to_string(a.seed)},     {"uniform_coils", a.uniform ? "true" : "false"},
                     {"tool", kToolVersion}};
    io::write_file_atomic(dir / "phantom.cfg", io::format_key_values(kv));
    std::printf("wrote %d slices (%d files) to %s\n", a.slices, 2 * a.slices, a.out_dir.c_str());
    return kOk;
}

struct RunArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

int cmd_train(const RunArgs& a) {
    const auto config = load_run_config(a.config, a.overrides, a.seed);
    const auto out = pipeline::run_train(config, a.quiet ? nullptr : &std::cout);
    print_report(out.train_report);
    if (!out.test_report.per_image.empty()) {
        print_report(out.test_report);
        print_report(out.zero_filled_test);
    }
    std::printf("artifacts in %s\n", config.output_dir.c_str());
    return kOk;
}

int cmd_compare(const RunArgs& a) {
    const auto config = load_run_config(a.config, a.overrides, a.seed);
    const auto table = pipeline::run_compare(config, a.quiet ? nullptr : &std::cout);
    std::cout << table.summary_csv();
    std::printf("artifacts in %s\n", config.output_dir.c_str());
    return kOk;
}

struct EvalArgs {
    std::string checkpoint, data, out;
};

int cmd_eval(const EvalArgs& a) {
    const auto ck = io::read_checkpoint(a.checkpoint);
    const auto data_config = a.data.empty() ? pipeline::checkpoint_config(ck) : load_config(a.data);
    const auto reports = pipeline::run_eval(ck, data_config);
    for (const auto& r : reports) print_report(r);
    if (!a.out.empty()) io::write_file_atomic(a.out, pipeline::metrics_csv(reports));
    return kOk;
}

struct ReconArgs {
    std::string checkpoint, in, out, pgm;
};

// Accepts either a normalized zero-filled image (real 2-D) or undersampled
// multicoil k-space (complex, coils x H x W); the latter is zero-filled,
// coil-combined and normalized here, and the output is scaled back.
int cmd_reconstruct(const ReconArgs& a) {
    const auto ck = io::read_checkpoint(a.checkpoint);
    const auto t = io::read_tensor(a.in);
    Image input;
    double scale = 1.0;
    if (t.dtype == io::DType::C64 || t.dtype == io::DType::C128) {
        const auto norm = mri::normalize(mri::sos_combine(mri::zero_fill_recon(mri::KSpaceVolume(io::tensor_coils(t)))));
        input = norm.image;
        scale = norm.scale;
    } else {
        input = io::tensor_image(t);
    }
    const Image rec = mri::scale_image(pipeline::run_reconstruct(ck, input), scale);
    io::write_tensor(a.out, io::image_tensor(rec));
    if (!a.pgm.empty()) io::write_pgm(a.pgm, rec);
    std::printf("reconstruction %dx%d -> %s\n", rec.height, rec.width, a.out.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid quantum-classical MRI reconstruction toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.footer(std::string("Exit codes: 0 ok, 1 refused, 2 usage, 3 format, 4 numeric.\n") + kOutputRootEnv +
               " prefixes relative output_dir values.");

    MaskArgs mask;
    auto* m = app.add_subcommand("mask-gen", "Write a Cartesian undersampling mask");
    m->add_option("--height", mask.height, "Phase-encode lines")->required()->check(CLI::PositiveNumber);
    m->add_option("--width", mask.width, "Readout samples")->required()->check(CLI::PositiveNumber);
    m->add_option("--accel", mask.accel, "Acceleration R >= 1")->capture_default_str();
    m->add_option("--center-frac", mask.center_frac, "Fully sampled center fraction (default by R)");
    m->add_option("--seed", mask.seed, "Mask seed")->capture_default_str();
    m->add_option("--out", mask.out, "Output tensor file")->required();

    QuanvArgs quanv;
    auto* q = app.add_subcommand("quanvolve", "Apply the fixed 4-qubit quanvolution to an image");
    q->add_option("--in", quanv.in, "Input 2-D real tensor file")->required();
    q->add_option("--out", quanv.out, "Output feature-map tensor file")->required();
    q->add_option("--readout", quanv.readout, "mean-z | per-qubit-z")->capture_default_str();
    q->add_option("--topology", quanv.topology, "chain | ring")->capture_default_str();
    q->add_option("--angle-scale", quanv.angle_scale, "Encoding angle multiplier")->capture_default_str();

    PhantomArgs ph;
    auto* p = app.add_subcommand("phantom", "Generate synthetic multicoil phantom slices");
    p->add_option("--coils", ph.coils)->capture_default_str();
    p->add_option("--ellipses", ph.ellipses)->capture_default_str();
    p->add_option("--size", ph.size, "Image side (power of two)")->capture_default_str();
    p->add_option("--slices", ph.slices)->capture_default_str()->check(CLI::NonNegativeNumber);
    p->add_option("--seed", ph.seed)->capture_default_str();
    p->add_flag("--uniform-coils", ph.uniform, "Unit, phase-free coil sensitivities");
    p->add_option("--out-dir", ph.out_dir)->required();
    p->add_flag("--force", ph.force, "Allow writing into a non-empty directory");

    RunArgs train_args, compare_args;
    auto add_run = [](CLI::App* sub, RunArgs& r) {
        sub->add_option("--config", r.config, "key=value run config")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", r.overrides, "Override a config key (key=value), repeatable");
        sub->add_option("--seed", r.seed, "Seed for model init, shuffling, masks and phantoms");
        sub->add_flag("--quiet", r.quiet, "No per-epoch log");
    };
    auto* t = app.add_subcommand("train", "Train one model");
    add_run(t, train_args);
    auto* c = app.add_subcommand("compare", "Train classical and hybrid arms per acceleration");
    add_run(c, compare_args);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score a checkpoint on its test split");
    e->add_option("--checkpoint", ev.checkpoint)->required();
    e->add_option("--data", ev.data, "Run config describing the data (default: the checkpoint's own)");
    e->add_option("--out", ev.out, "Write metrics CSV here");

    ReconArgs rc;
    auto* r = app.add_subcommand("reconstruct", "Reconstruct one image with a checkpoint");
    r->add_option("--checkpoint", rc.checkpoint)->required();
    r->add_option("--in", rc.in, "Normalized zero-filled image, or undersampled k-space")->required();
    r->add_option("--out", rc.out, "Output image tensor file")->required();
    r->add_option("--pgm", rc.pgm, "Also write an 8-bit PGM");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*m) return cmd_mask_gen(mask);
        if (*q) return cmd_quanvolve(quanv);
        if (*p) return cmd_phantom(ph);
        if (*t) return cmd_train(train_args);
        if (*c) return cmd_compare(compare_args);
        if (*e) return cmd_eval(ev);
        if (*r) return cmd_reconstruct(rc);
    } catch (const FormatError& err) {
        std::fprintf(stderr, "format error: %s\n", err.what());
        return kFormat;
    } catch (const NumericError& err) {
        std::fprintf(stderr, "numeric failure: %s\n", err.what());
        return kNumeric;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kRefused;
    }
    return kUsage;
}

// Copyright 2026 The EFDN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "efdn/dataset.hpp"
#include "efdn/error.hpp"
#include "efdn/imaging.hpp"
#include "efdn/loss.hpp"
#include "efdn/network.hpp"
#include "efdn/train.hpp"
#include "efdn/weights_file.hpp"

namespace efdn::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kReferenceParams = 276e3;
constexpr double kReferenceMadds = 14.7e9;

std::string fixed(double v, int digits) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string general(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

Tensor crop_top_left(const Tensor& t, int h, int w) {
    if (t.h() == h && t.w() == w) {
        return t;
    }
    Tensor out({t.n(), t.c(), h, w});
    for (int n = 0; n < t.n(); ++n) {
        for (int c = 0; c < t.c(); ++c) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    out.at(n, c, y, x) = t.at(n, c, y, x);
                }
            }
        }
    }
    return out;
}

Tensor load_tensor(const fs::path& p) { return to_tensor(load_png(p)); }

std::optional<Arch> arch_option(const std::string& s) {
    return parse_arch(s);
}

ModelSpec make_spec(const std::string& arch_text, const std::string& block, int scale, int width, int depth) {
    const auto arch = arch_option(arch_text);
    if (!arch) {
        throw ConfigError("unknown --arch '" + arch_text + "' (expected efdn, fsrcnn_like or vdsr_like)");
    }
    if (block != "edbb" && block != "baseline") {
        throw ConfigError("unknown --block '" + block + "' (expected edbb or baseline)");
    }
    const BlockKind bk = block == "edbb" ? BlockKind::edbb : BlockKind::baseline_conv;
    ModelSpec spec;
    if (*arch == Arch::efdn) {
        spec = efdn_spec(scale, width > 0 ? width : 48);
        if (bk == BlockKind::baseline_conv) {
            spec.branch_kinds.clear();
        }
    } else {
        spec = toy_spec(*arch == Arch::fsrcnn_like ? ToyKind::plain_fsrcnn_like : ToyKind::plain_vdsr_like, bk, scale);
        if (width > 0) {
            spec.width = width;
        }
        if (depth > 0) {
            spec.depth = depth;
        }
    }
    spec.validate();
    return spec;
}

// ---- commands ---------------------------------------------------------------

struct InitOpts {
    std::string arch = "efdn";
    std::string block = "edbb";
    int scale = 4;
    int width = 0;
    int depth = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_init(const InitOpts& o, std::ostream& out) {
    const ModelSpec spec = make_spec(o.arch, o.block, o.scale, o.width, o.depth);
    const Model m = build_model(spec, o.seed);
    save_weights(m, o.out);
    out << "wrote " << o.out << " arch=" << arch_name(spec.arch) << " scale=" << spec.scale
        << " width=" << spec.width << " mode=" << mode_name(spec.mode) << " seed=" << o.seed
        << " params=" << count_trainable_params(m) << "\n";
    return 0;
}

struct MergeOpts {
    std::string in;
    std::string out;
};

int cmd_merge(const MergeOpts& o, std::ostream& out) {
    const Model m = load_weights(o.in);
    const Model merged = merge_model(m);
    save_weights(merged, o.out);
    out << "params before: " << count_trainable_params(m) << "\n";
    out << "params after:  " << count_trainable_params(merged) << "\n";
    out << "wrote " << o.out << "\n";
    return 0;
}

struct InferOpts {
    std::string weights;
    std::string input;
    std::string output;
    int scale = 0;
};

int cmd_infer(const InferOpts& o, std::ostream& out) {
    const Model m = load_weights(o.weights);
    if (o.scale != 0 && o.scale != m.spec().scale) {
        throw InputError("--scale " + std::to_string(o.scale) + " does not match the model scale " +
                         std::to_string(m.spec().scale));
    }
    const Tensor lr = load_tensor(o.input);
    const Tensor sr = model_forward(lr, m);
    const Image img = to_image(sr);
    save_png(img, o.output);
    out << "wrote " << o.output << " (" << img.width << "x" << img.height << ")\n";
    return 0;
}

struct EvalOpts {
    std::string hr_dir;
    std::string sr_dir;
    std::string lr_dir;
    std::string weights;
    bool bicubic = false;
    int scale = 0;
    int shave = -1;
};

int cmd_eval(const EvalOpts& o, std::ostream& out) {
    const int sources = int(!o.sr_dir.empty()) + int(!o.weights.empty()) + int(o.bicubic);
    if (sources != 1) {
        throw UsageError("eval needs exactly one of --sr-dir, --weights or --bicubic");
    }
    if (o.sr_dir.empty() && o.lr_dir.empty()) {
        throw UsageError("--weights and --bicubic need --lr-dir");
    }
    std::optional<Model> model;
    int scale = o.scale;
    if (!o.weights.empty()) {
        model.emplace(load_weights(o.weights));
        if (scale != 0 && scale != model->spec().scale) {
            throw InputError("--scale does not match the model scale");
        }
        scale = model->spec().scale;
    }
    if (o.bicubic && scale < 1) {
        throw UsageError("--bicubic needs --scale");
    }
    const int shave = o.shave >= 0 ? o.shave : std::max(scale, 0);

    const auto hr_paths = list_pngs(o.hr_dir);
    struct Row {
        std::string name;
        double psnr;
        double ssim;
    };
    std::vector<Row> rows;
    for (const fs::path& hp : hr_paths) {
        const std::string name = hp.filename().string();
        const Tensor hr = load_tensor(hp);
        Tensor sr;
        if (!o.sr_dir.empty()) {
            sr = load_tensor(fs::path(o.sr_dir) / name);
        } else {
            const Tensor lr = load_tensor(fs::path(o.lr_dir) / name);
            sr = model ? model_forward(lr, *model) : bicubic_resize(lr, scale);
            sr = to_tensor(to_image(sr));
        }
        if (sr.h() > hr.h() || sr.w() > hr.w()) {
            throw InputError(name + ": SR " + to_string(sr.shape()) + " larger than HR " + to_string(hr.shape()));
        }
        const Tensor hr_c = crop_top_left(hr, sr.h(), sr.w());
        rows.push_back({name, psnr_y(sr, hr_c, shave), ssim_y(sr, hr_c, shave)});
    }

    double psnr_sum = 0.0, ssim_sum = 0.0;
    std::size_t name_w = 5;
    for (const Row& r : rows) {
        psnr_sum += r.psnr;
        ssim_sum += r.ssim;
        name_w = std::max(name_w, r.name.size());
    }
    const double n = static_cast<double>(rows.size());
    const double mean_psnr = psnr_sum / n, mean_ssim = ssim_sum / n;

    out << std::left << std::setw(static_cast<int>(name_w)) << "image" << "  " << std::right << std::setw(10)
        << "PSNR(dB)" << "  " << std::setw(8) << "SSIM" << "\n";
    for (const Row& r : rows) {
        out << std::left << std::setw(static_cast<int>(name_w)) << r.name << "  " << std::right << std::setw(10)
            << fixed(r.psnr, 2) << "  " << std::setw(8) << fixed(r.ssim, 4) << "\n";
    }
    out << std::left << std::setw(static_cast<int>(name_w)) << "mean" << "  " << std::right << std::setw(10)
        << fixed(mean_psnr, 2) << "  " << std::setw(8) << fixed(mean_ssim, 4) << "\n";
    for (const Row& r : rows) {
        out << "result image=" << r.name << " psnr=" << fixed(r.psnr, 6) << " ssim=" << fixed(r.ssim, 6) << "\n";
    }
    out << "result mean psnr=" << fixed(mean_psnr, 6) << " ssim=" << fixed(mean_ssim, 6) << " count=" << rows.size()
        << " shave=" << shave << "\n";
    return 0;
}

struct DegradeOpts {
    std::string hr_dir;
    std::string out_dir;
    int scale = 4;
};

int cmd_degrade(const DegradeOpts& o, std::ostream& out) {
    if (o.scale < 1) {
        throw UsageError("--scale must be >= 1");
    }
    const auto paths = list_pngs(o.hr_dir);
    fs::create_directories(o.out_dir);
    for (const fs::path& p : paths) {
        const Tensor lr = bicubic_resize(load_tensor(p), 1.0 / o.scale);
        save_png(to_image(lr), fs::path(o.out_dir) / p.filename());
    }
    out << "wrote " << paths.size() << " images to " << o.out_dir << "\n";
    return 0;
}

struct TrainOpts {
    std::string data_dir;
    int synthetic = 0;
    int size = 64;
    std::string arch = "fsrcnn_like";
    std::string block = "edbb";
    int scale = 2;
    int width = 0;
    int depth = 0;
    std::string stages;
    std::uint64_t seed = 0;
    std::string out;
    std::string curve;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    if (!in) {
        throw IoError(p.string() + ": cannot open");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_train_toy(const TrainOpts& o, std::ostream& out) {
    if (o.data_dir.empty() == (o.synthetic <= 0)) {
        throw UsageError("train-toy needs exactly one of --data-dir or --synthetic");
    }
    const ModelSpec spec = make_spec(o.arch, o.block, o.scale, o.width, o.depth);

    std::vector<Tensor> hr;
    if (!o.data_dir.empty()) {
        for (const fs::path& p : list_pngs(o.data_dir)) {
            const Tensor t = load_tensor(p);
            hr.push_back(crop_top_left(t, t.h() - t.h() % spec.scale, t.w() - t.w() % spec.scale));
        }
    } else {
        hr = synthetic_images(o.synthetic, o.size, o.seed);
    }
    const auto samples = make_samples(hr, spec.scale);

    TrainConfig cfg;
    if (!o.stages.empty()) {
        cfg = parse_train_config(read_text(o.stages));
    } else {
        cfg.stages.push_back(StageConfig{});
    }
    cfg.seed = o.seed;

    Model m = build_model(spec, o.seed);
    const TrainResult result = train_loop(m, samples, cfg);
    save_weights(m, o.out);

    if (!o.curve.empty()) {
        std::ofstream csv(o.curve);
        if (!csv) {
            throw IoError(o.curve + ": cannot open for writing");
        }
        csv << "stage,step,lr,loss\n";
        for (const StepRecord& r : result.curve) {
            csv << r.stage << "," << r.step << "," << general(r.lr) << "," << general(r.loss) << "\n";
        }
    }

    out << "seed=" << o.seed << " arch=" << arch_name(spec.arch) << " samples=" << samples.size() << "\n";
    for (std::size_t s = 0; s < cfg.stages.size(); ++s) {
        double last = 0.0;
        for (const StepRecord& r : result.curve) {
            if (r.stage == static_cast<int>(s)) {
                last = r.loss;
            }
        }
        out << "stage " << cfg.stages[s].name << " loss=" << loss_kind_name(cfg.stages[s].loss)
            << " final=" << general(last) << "\n";
    }
    out << "wrote " << o.out << "\n";
    return 0;
}

struct LossOpts {
    std::string sr;
    std::string hr;
    int patch = kDefaultPatch;
    double lx = kDefaultLambdaTotal / 3.0;
    double ly = kDefaultLambdaTotal / 3.0;
    double ll = kDefaultLambdaTotal / 3.0;
};

int cmd_loss(const LossOpts& o, std::ostream& out) {
    LossConfig cfg;
    cfg.patch = o.patch;
    cfg.lambda_x = o.lx;
    cfg.lambda_y = o.ly;
    cfg.lambda_l = o.ll;
    cfg.validate();
    const EgLoss l = eg_loss(load_tensor(o.sr), load_tensor(o.hr), cfg);
    out << "L1=" << general(l.l1) << " Lx=" << general(l.lx) << " Ly=" << general(l.ly) << " Ll=" << general(l.ll)
        << " total=" << general(l.total) << "\n";
    return 0;
}

struct ComplexityOpts {
    std::string arch = "efdn";
    int scale = 4;
    int width = 0;
    int depth = 0;
    int out_h = 720;
    int out_w = 1280;
};

int cmd_complexity(const ComplexityOpts& o, std::ostream& out) {
    const ModelSpec spec = make_spec(o.arch, "edbb", o.scale, o.width, o.depth);
    const std::int64_t params = count_params(spec);
    const std::int64_t madds = count_madds(spec, o.out_h, o.out_w);
    out << "arch=" << arch_name(spec.arch) << " scale=" << spec.scale << " width=" << spec.width
        << " output=" << o.out_w << "x" << o.out_h << "\n";
    out << "params=" << params << " (" << fixed(params / 1e3, 1) << "K)\n";
    out << "madds=" << madds << " (" << fixed(madds / 1e9, 2) << "G)\n";
    if (spec == efdn_spec()) {
        out << "reference params=" << fixed(kReferenceParams / 1e3, 0) << "K madds=" << fixed(kReferenceMadds / 1e9, 1)
            << "G (published figures, not asserted)\n";
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Edge-enhanced feature distillation super-resolution toolkit", "efdn"};
    app.require_subcommand(1);

    InitOpts init;
    auto* c_init = app.add_subcommand("init", "Write a randomly initialized weights file");
    c_init->add_option("--arch", init.arch, "efdn, fsrcnn_like or vdsr_like");
    c_init->add_option("--block", init.block, "edbb or baseline");
    c_init->add_option("--scale", init.scale);
    c_init->add_option("--width", init.width);
    c_init->add_option("--depth", init.depth, "Body convs of toy stacks");
    c_init->add_option("--seed", init.seed);
    c_init->add_option("--out", init.out)->required();

    MergeOpts merge;
    auto* c_merge = app.add_subcommand("merge", "Fold every EDBB into a single conv");
    c_merge->add_option("--in", merge.in)->required();
    c_merge->add_option("--out", merge.out)->required();

    InferOpts infer;
    auto* c_infer = app.add_subcommand("infer", "Super-resolve one PNG");
    c_infer->add_option("--weights", infer.weights)->required();
    c_infer->add_option("--input", infer.input)->required();
    c_infer->add_option("--output", infer.output)->required();
    c_infer->add_option("--scale", infer.scale);

    EvalOpts eval;
    auto* c_eval = app.add_subcommand("eval", "Y-channel PSNR / SSIM against an HR directory");
    c_eval->add_option("--hr-dir", eval.hr_dir)->required();
    c_eval->add_option("--sr-dir", eval.sr_dir, "Precomputed SR images");
    c_eval->add_option("--lr-dir", eval.lr_dir);
    c_eval->add_option("--weights", eval.weights);
    c_eval->add_flag("--bicubic", eval.bicubic, "Bicubic upscaling baseline");
    c_eval->add_option("--scale", eval.scale);
    c_eval->add_option("--shave", eval.shave, "Border pixels ignored (default: scale)");

    DegradeOpts degrade;
    auto* c_degrade = app.add_subcommand("degrade", "Bicubic-downscale an HR directory");
    c_degrade->add_option("--hr-dir", degrade.hr_dir)->required();
    c_degrade->add_option("--out-dir", degrade.out_dir)->required();
    c_degrade->add_option("--scale", degrade.scale);

    TrainOpts train;
    auto* c_train = app.add_subcommand("train-toy", "Train a small network from a stage config");
    c_train->add_option("--data-dir", train.data_dir, "HR PNG directory");
    c_train->add_option("--synthetic", train.synthetic, "Number of procedural HR images");
    c_train->add_option("--size", train.size, "Side of procedural images");
    c_train->add_option("--arch", train.arch);
    c_train->add_option("--block", train.block);
    c_train->add_option("--scale", train.scale);
    c_train->add_option("--width", train.width);
    c_train->add_option("--depth", train.depth);
    c_train->add_option("--stages", train.stages, "Stage config file");
    c_train->add_option("--seed", train.seed);
    c_train->add_option("--out", train.out)->required();
    c_train->add_option("--curve", train.curve, "CSV loss curve (stage,step,lr,loss)");

    LossOpts loss;
    auto* c_loss = app.add_subcommand("loss", "Print the loss terms between two PNGs");
    c_loss->add_option("--sr", loss.sr)->required();
    c_loss->add_option("--hr", loss.hr)->required();
    c_loss->add_option("--patch", loss.patch);
    c_loss->add_option("--lx", loss.lx);
    c_loss->add_option("--ly", loss.ly);
    c_loss->add_option("--ll", loss.ll);

    ComplexityOpts cx;
    auto* c_cx = app.add_subcommand("complexity", "Deploy-form parameters and multiply-adds");
    c_cx->add_option("--arch", cx.arch);
    c_cx->add_option("--scale", cx.scale);
    c_cx->add_option("--width", cx.width);
    c_cx->add_option("--depth", cx.depth);
    c_cx->add_option("--out-h", cx.out_h);
    c_cx->add_option("--out-w", cx.out_w);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "efdn: " << e.what() << "\n";
        return 2;
    }

    try {
        if (c_init->parsed()) return cmd_init(init, out);
        if (c_merge->parsed()) return cmd_merge(merge, out);
        if (c_infer->parsed()) return cmd_infer(infer, out);
        if (c_eval->parsed()) return cmd_eval(eval, out);
        if (c_degrade->parsed()) return cmd_degrade(degrade, out);
        if (c_train->parsed()) return cmd_train_toy(train, out);
        if (c_loss->parsed()) return cmd_loss(loss, out);
        if (c_cx->parsed()) return cmd_complexity(cx, out);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "efdn: error: " << msg << "\n";
        return 1;
    }
    return 1;
}

} // namespace efdn::cli

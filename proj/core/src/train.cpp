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

#include "efdn/train.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>

#include "efdn/autodiff.hpp"
#include "efdn/error.hpp"
#include "efdn/optim.hpp"

namespace efdn {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) {
            return d;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("stage config line " + std::to_string(line) + ": bad number for " + key + ": " + v);
}

int parse_int(const std::string& v, const std::string& key, int line) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("stage config line " + std::to_string(line) + ": bad integer for " + key + ": " + v);
    }
    return out;
}

// Square crop + augmentation transform, applied identically to LR and HR.
struct Transform {
    bool flip = false;
    int rot = 0;  // quarter turns
};

Tensor crop_transform(const Tensor& img, int y0, int x0, int size_h, int size_w, const Transform& t) {
    Tensor out({1, img.c(), size_h, size_w});
    for (int c = 0; c < img.c(); ++c) {
        for (int y = 0; y < size_h; ++y) {
            for (int x = 0; x < size_w; ++x) {
                out.at(0, c, y, x) = img.at(0, c, y0 + y, x0 + x);
            }
        }
    }
    if (t.flip) {
        for (int c = 0; c < out.c(); ++c) {
            for (int y = 0; y < size_h; ++y) {
                float* row = out.plane(0, c) + static_cast<std::size_t>(y) * size_w;
                std::reverse(row, row + size_w);
            }
        }
    }
    for (int r = 0; r < t.rot; ++r) {
        Tensor rotated({1, out.c(), out.w(), out.h()});
        for (int c = 0; c < out.c(); ++c) {
            for (int y = 0; y < out.h(); ++y) {
                for (int x = 0; x < out.w(); ++x) {
                    rotated.at(0, c, out.w() - 1 - x, y) = out.at(0, c, y, x);
                }
            }
        }
        out = std::move(rotated);
    }
    return out;
}

Tensor stack(const std::vector<Tensor>& items) {
    const Shape4 s = items.front().shape();
    Tensor out({static_cast<int>(items.size()), s.c, s.h, s.w});
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].shape() != s) {
            throw InputError("minibatch items differ in shape; set a crop size");
        }
        std::copy_n(items[i].data(), items[i].size(), out.plane(static_cast<int>(i), 0));
    }
    return out;
}

int sample_scale(const Sample& s) {
    if (s.lr.h() < 1 || s.hr.h() % s.lr.h() != 0 || s.hr.w() % s.lr.w() != 0 ||
        s.hr.h() / s.lr.h() != s.hr.w() / s.lr.w()) {
        throw InputError("sample HR " + to_string(s.hr.shape()) + " is not an integer multiple of LR " +
                         to_string(s.lr.shape()));
    }
    return s.hr.h() / s.lr.h();
}

Var record_loss(Tape& tape, LossKind kind, Var sr, const Tensor& hr, const LossConfig& cfg) {
    switch (kind) {
    case LossKind::l1:
        return tape.l1_loss(sr, hr);
    case LossKind::l2:
        return tape.l2_loss(sr, hr);
    case LossKind::eg:
        break;
    }
    return tape.eg_loss(sr, hr, cfg);
}

} // namespace

std::string_view loss_kind_name(LossKind k) noexcept {
    switch (k) {
    case LossKind::l1:
        return "l1";
    case LossKind::eg:
        return "eg";
    case LossKind::l2:
        break;
    }
    return "l2";
}

std::optional<LossKind> parse_loss_kind(std::string_view s) noexcept {
    for (LossKind k : {LossKind::l1, LossKind::eg, LossKind::l2}) {
        if (loss_kind_name(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

TrainConfig parse_train_config(std::string_view text) {
    TrainConfig cfg;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    StageConfig* cur = nullptr;
    // Per stage bitmask of the lx/ly/ll keys seen.
    std::vector<int> lambda_keys;
    std::vector<Lambdas> pending_all;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("stage config line " + std::to_string(line_no) + ": unterminated section");
            }
            std::istringstream hdr(line.substr(1, line.size() - 2));
            std::string word, name;
            hdr >> word >> name;
            if (word != "stage") {
                throw ConfigError("stage config line " + std::to_string(line_no) + ": expected [stage <name>]");
            }
            cfg.stages.emplace_back();
            cfg.stages.back().name = name.empty() ? "stage" + std::to_string(cfg.stages.size()) : name;
            cur = &cfg.stages.back();
            lambda_keys.push_back(0);
            pending_all.push_back({});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("stage config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string val = trim(std::string_view(line).substr(eq + 1));
        if (cur == nullptr) {
            if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(parse_double(val, key, line_no));
            } else if (key == "augment") {
                cfg.augment = val == "true" || val == "1";
            } else {
                throw ConfigError("stage config line " + std::to_string(line_no) + ": unknown global key " + key);
            }
            continue;
        }
        if (key == "loss") {
            const auto k = parse_loss_kind(val);
            if (!k) {
                throw ConfigError("stage config line " + std::to_string(line_no) + ": loss must be l1, eg or l2");
            }
            cur->loss = *k;
        } else if (key == "lr") {
            cur->lr0 = parse_double(val, key, line_no);
        } else if (key == "lr_min") {
            cur->lr_min = parse_double(val, key, line_no);
        } else if (key == "steps") {
            cur->steps = parse_int(val, key, line_no);
        } else if (key == "crop") {
            cur->crop = parse_int(val, key, line_no);
        } else if (key == "batch") {
            cur->batch = parse_int(val, key, line_no);
        } else if (key == "patch") {
            cur->patch = parse_int(val, key, line_no);
        } else if (key == "lambda_total") {
            cur->lambda_total = parse_double(val, key, line_no);
        } else if (key == "lx" || key == "ly" || key == "ll") {
            const double v = parse_double(val, key, line_no);
            Lambdas& l = pending_all.back();
            (key == "lx" ? l.x : key == "ly" ? l.y : l.l) = v;
            lambda_keys.back() |= key == "lx" ? 1 : key == "ly" ? 2 : 4;
        } else if (key == "merge") {
            cur->merge_first = val == "true" || val == "1";
        } else {
            throw ConfigError("stage config line " + std::to_string(line_no) + ": unknown key " + key);
        }
    }
    for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
        if (lambda_keys[i] == 7) {
            cfg.stages[i].lambdas = pending_all[i];
        } else if (lambda_keys[i] != 0) {
            throw ConfigError("stage " + cfg.stages[i].name + ": give all of lx, ly, ll or none");
        }
        const StageConfig& s = cfg.stages[i];
        if (s.steps < 0 || s.batch < 1 || s.crop < 0 || s.lr0 < 0.0 || s.lr_min < 0.0) {
            throw ConfigError("stage " + s.name + ": steps/crop must be >= 0, batch >= 1, rates >= 0");
        }
    }
    if (cfg.stages.empty()) {
        throw ConfigError("stage config defines no [stage ...] sections");
    }
    return cfg;
}

LossConfig resolve_loss_config(const StageConfig& stage, const Model& m) {
    LossConfig cfg;
    cfg.patch = stage.patch;
    if (stage.lambdas) {
        cfg = with_lambdas(cfg, *stage.lambdas);
    } else {
        const EdgeScales s = mean_edge_scales(m);
        cfg = with_lambdas(cfg, s.found ? derive_lambdas(s.sobel_x, s.sobel_y, s.laplacian, stage.lambda_total)
                                        : derive_lambdas(0.0, 0.0, 0.0, stage.lambda_total));
    }
    cfg.validate();
    return cfg;
}

double loss_value(LossKind kind, const Tensor& sr, const Tensor& hr, const LossConfig& cfg) {
    switch (kind) {
    case LossKind::l1:
        return l1_loss(sr, hr);
    case LossKind::l2:
        return l2_loss(sr, hr);
    case LossKind::eg:
        break;
    }
    return eg_loss(sr, hr, cfg).total;
}

double evaluate_loss(const Model& model, std::span<const Sample> dataset, LossKind loss, const LossConfig& cfg) {
    if (dataset.empty()) {
        throw UsageError("evaluate_loss: empty dataset");
    }
    double total = 0.0;
    for (const Sample& s : dataset) {
        total += loss_value(loss, model_forward(s.lr, model), s.hr, cfg);
    }
    return total / static_cast<double>(dataset.size());
}

TrainResult train_loop(Model& model, std::span<const Sample> dataset, const TrainConfig& cfg) {
    if (dataset.empty()) {
        throw UsageError("train_loop: empty dataset");
    }
    const int scale = sample_scale(dataset.front());
    if (scale != model.spec().scale) {
        throw InputError("dataset scale " + std::to_string(scale) + " does not match model scale " +
                         std::to_string(model.spec().scale));
    }
    for (const Sample& s : dataset) {
        if (sample_scale(s) != scale) {
            throw InputError("dataset mixes scale factors");
        }
    }

    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    int global_step = 0;
    Tape tape;

    for (std::size_t si = 0; si < cfg.stages.size(); ++si) {
        const StageConfig& stage = cfg.stages[si];
        if (stage.merge_first && model.spec().mode == Mode::train) {
            model = merge_model(model);
        }
        const LossConfig loss_cfg = resolve_loss_config(stage, model);
        result.stage_loss.push_back(loss_cfg);

        std::vector<ParamSlot> params = parameter_slots(model);
        AdamState adam;
        const CosineSchedule schedule{stage.lr0, stage.lr_min, stage.steps};
        std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);

        for (int step = 0; step < stage.steps; ++step) {
            std::vector<Tensor> lr_items, hr_items;
            for (int b = 0; b < stage.batch; ++b) {
                const Sample& s = dataset[pick(rng)];
                const int side = stage.crop > 0 ? stage.crop : 0;
                if (side > s.lr.h() || side > s.lr.w()) {
                    throw InputError("crop " + std::to_string(side) + " larger than sample " +
                                     to_string(s.lr.shape()));
                }
                const int ch = side ? side : s.lr.h(), cw = side ? side : s.lr.w();
                const int y0 = std::uniform_int_distribution<int>(0, s.lr.h() - ch)(rng);
                const int x0 = std::uniform_int_distribution<int>(0, s.lr.w() - cw)(rng);
                Transform t;
                if (cfg.augment) {
                    t.flip = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
                    const int quarter = std::uniform_int_distribution<int>(0, 3)(rng);
                    t.rot = ch == cw ? quarter : quarter & 2;
                }
                lr_items.push_back(crop_transform(s.lr, y0, x0, ch, cw, t));
                hr_items.push_back(crop_transform(s.hr, y0 * scale, x0 * scale, ch * scale, cw * scale, t));
            }
            const Tensor lr_batch = stack(lr_items);
            const Tensor hr_batch = stack(hr_items);

            tape.clear();
            const Var sr = record_model(tape, model, tape.constant(lr_batch));
            const Var loss = record_loss(tape, stage.loss, sr, hr_batch, loss_cfg);
            tape.backward(loss);

            std::vector<std::span<const float>> grads;
            grads.reserve(params.size());
            for (const ParamSlot& p : params) {
                grads.push_back(tape.param_grad(p.values.data()));
            }
            const double lr_now = schedule.at(step);
            adam_step(params, grads, adam, lr_now);
            result.curve.push_back({static_cast<int>(si), global_step++, lr_now, tape.value(loss).data()[0]});
        }
    }
    return result;
}

} // namespace efdn

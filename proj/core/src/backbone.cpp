#include "s2r/backbone.hpp"

#include <algorithm>
#include <cmath>

#include <torch/script.h>

#include "s2r/errors.hpp"
#include "s2r/module_utils.hpp"
#include "s2r/patch_ops.hpp"

namespace s2r {

std::vector<int> BackboneConfig::vgg16_arch() {
    return {64, 64, kPool, 128, 128, kPool, 256, 256, 256, kPool, 512, 512, 512, kPool, 512, 512, 512, kPool};
}

const torch::Tensor& FeaturePyramid::at(const std::string& layer_id) const {
    for (std::size_t i = 0; i < layer_ids.size(); ++i)
        if (layer_ids[i] == layer_id) return layers[i];
    throw ArgumentError("feature pyramid has no layer " + layer_id);
}

FeatureBackboneImpl::FeatureBackboneImpl(BackboneConfig config) : config_(std::move(config)) {
    require_arg(!config_.layer_ids.empty(), "backbone: at least one layer id required");

    // Name every conv output and remember where the requested ones sit.
    std::vector<std::pair<std::string, std::size_t>> names;
    std::vector<std::int64_t> widths;
    std::vector<std::int64_t> pools_before;
    int block = 1, conv_in_block = 0, pools = 0;
    std::int64_t in_ch = 3;
    for (int width : config_.arch) {
        Step s;
        if (width == BackboneConfig::kPool) {
            s.pool = true;
            ++block;
            conv_in_block = 0;
            ++pools;
        } else {
            require_arg(width > 0, "backbone: conv widths must be positive");
            s.conv = register_module("conv" + std::to_string(steps_.size()),
                                     torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, width, 3).padding(1)));
            in_ch = width;
            ++conv_in_block;
            names.emplace_back("relu" + std::to_string(block) + "_" + std::to_string(conv_in_block), steps_.size());
            widths.push_back(width);
            pools_before.push_back(pools);
        }
        steps_.push_back(std::move(s));
    }

    std::size_t last_step = 0;
    bool first = true;
    for (const auto& id : config_.layer_ids) {
        auto it = std::find_if(names.begin(), names.end(), [&](const auto& n) { return n.first == id; });
        if (it == names.end()) throw ConfigError("backbone: unknown layer id '" + id + "'");
        if (!first && it->second <= last_step)
            throw ConfigError("backbone: layer ids must be strictly increasing in depth");
        first = false;
        last_step = it->second;
        const auto idx = static_cast<std::size_t>(it - names.begin());
        taps_.push_back(Tap{id, it->second});
        tap_channels_.push_back(widths[idx]);
        min_input_ = std::int64_t{1} << pools_before[idx];
    }

    mean_ = register_buffer("mean", torch::tensor({config_.mean[0], config_.mean[1], config_.mean[2]},
                                                  torch::kFloat32).view({1, 3, 1, 1}));
    std_ = register_buffer("std", torch::tensor({config_.std[0], config_.std[1], config_.std[2]},
                                                torch::kFloat32).view({1, 3, 1, 1}));

    if (config_.weights_source == WeightsSource::PretrainedFile)
        load_pretrained(config_.weights_path);
    else
        init_random_fixed();
    for (auto& p : parameters()) p.set_requires_grad(false);
    eval();
}

void FeatureBackboneImpl::init_random_fixed() {
    // He-normal (fan-out) weights, zero bias, drawn from a private generator.
    auto gen = make_generator(derive_seed(config_.seed, 0xBAC4B04E));
    torch::NoGradGuard guard;
    for (auto& s : steps_) {
        if (s.pool) continue;
        auto& w = s.conv->weight;
        const auto fan_out = w.size(0) * w.size(2) * w.size(3);
        const double stdev = std::sqrt(2.0 / static_cast<double>(fan_out));
        w.copy_(at::normal(0.0, stdev, w.sizes(), gen));
        s.conv->bias.zero_();
    }
}

void FeatureBackboneImpl::load_pretrained(const std::string& path) {
    if (path.empty()) throw ConfigError("backbone: pretrained_file weights require weights_path");
    torch::jit::script::Module src;
    try {
        src = torch::jit::load(path);
    } catch (const c10::Error& e) {
        throw Error("backbone: cannot load weights from " + path + ": " + e.what_without_backtrace());
    }
    // Conv weights are the 4-D parameters in registration order, each followed by its bias.
    std::vector<torch::Tensor> weights, biases;
    for (const auto& p : src.named_parameters(/*recurse=*/true)) {
        if (p.value.dim() == 4)
            weights.push_back(p.value);
        else if (p.value.dim() == 1)
            biases.push_back(p.value);
    }
    torch::NoGradGuard guard;
    std::size_t i = 0;
    for (auto& s : steps_) {
        if (s.pool) continue;
        if (i >= weights.size() || i >= biases.size())
            throw Error("backbone: weights file has fewer conv layers than the configured architecture");
        if (weights[i].sizes() != s.conv->weight.sizes() || biases[i].sizes() != s.conv->bias.sizes())
            throw ShapeError("backbone: weights file layer " + std::to_string(i) + " shape mismatch");
        s.conv->weight.copy_(weights[i]);
        s.conv->bias.copy_(biases[i]);
        ++i;
    }
}

FeaturePyramid FeatureBackboneImpl::extract(const torch::Tensor& x) const {
    require_shape(x.dim() == 4 && x.size(1) == 3, "backbone: expected B×3×H×W input");
    if (x.size(2) < min_input_ || x.size(3) < min_input_)
        throw ArgumentError("backbone: input " + std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)) +
                            " smaller than minimum " + std::to_string(min_input_));
    FeaturePyramid out;
    out.source_batch = x.size(0);
    auto h = ((x + 1.0) * 0.5 - mean_) / std_;
    std::size_t tap = 0;
    for (std::size_t i = 0; i < steps_.size() && tap < taps_.size(); ++i) {
        const auto& s = steps_[i];
        if (s.pool) {
            h = torch::max_pool2d(h, 2);
            continue;
        }
        h = torch::relu(s.conv.ptr()->forward(h));
        if (taps_[tap].step == i) {
            out.layer_ids.push_back(taps_[tap].id);
            out.layers.push_back(h);
            ++tap;
        }
    }
    return out;
}

FeaturePyramid FeatureBackboneImpl::phi(const torch::Tensor& x, int grid_k) const {
    return extract(patchify(x, grid_k).data);
}

std::int64_t FeatureBackboneImpl::channels(const std::string& layer_id) const {
    for (std::size_t i = 0; i < taps_.size(); ++i)
        if (taps_[i].id == layer_id) return tap_channels_[i];
    throw ArgumentError("backbone has no layer " + layer_id);
}

std::vector<std::int64_t> FeatureBackboneImpl::layer_channels() const { return tap_channels_; }

}  // namespace s2r

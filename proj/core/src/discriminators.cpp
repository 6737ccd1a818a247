#include "s2r/discriminators.hpp"

#include <algorithm>

#include "s2r/errors.hpp"
#include "s2r/wavelet.hpp"

namespace s2r {

FeatureDiscriminatorImpl::FeatureDiscriminatorImpl(std::int64_t in_channels, const DiscriminatorConfig& config)
    : in_channels_(in_channels) {
    require_arg(config.feature_num_blocks >= 1, "feature discriminator needs at least one block");
    require_arg(config.feature_hidden % config.group_norm_groups == 0,
                "feature discriminator width must be divisible by the group count");
    std::int64_t ch = in_channels;
    for (int i = 0; i < config.feature_num_blocks; ++i) {
        auto conv = register_module(
            "conv" + std::to_string(i),
            SNConv2d(torch::nn::Conv2dOptions(ch, config.feature_hidden, 3).padding(1), config.power_iterations));
        auto norm = register_module(
            "norm" + std::to_string(i),
            torch::nn::GroupNorm(torch::nn::GroupNormOptions(config.group_norm_groups, config.feature_hidden)));
        convs_.push_back(conv);
        norms_.push_back(norm);
        ch = config.feature_hidden;
    }
    proj_ = register_module("proj", SNConv2d(torch::nn::Conv2dOptions(ch, 1, 1), config.power_iterations));
}

torch::Tensor FeatureDiscriminatorImpl::forward(const torch::Tensor& features) {
    if (features.dim() != 4 || features.size(1) != in_channels_)
        throw ConfigError("feature discriminator expects " + std::to_string(in_channels_) + " input channels");
    auto h = features;
    for (std::size_t i = 0; i < convs_.size(); ++i) h = torch::relu(norms_[i]->forward(convs_[i]->forward(h)));
    return proj_->forward(h);
}

std::vector<SNConv2d> FeatureDiscriminatorImpl::sn_convs() const {
    auto out = convs_;
    out.push_back(proj_);
    return out;
}

WholeImageDiscriminatorImpl::WholeImageDiscriminatorImpl(const DiscriminatorConfig& config) {
    require_arg(config.whole_num_blocks >= 1, "whole-image discriminator needs at least one block");
    convs_ = register_module("convs", torch::nn::ModuleList());
    std::int64_t ch = 12;  // 4 Haar sub-bands × RGB
    for (int i = 0; i < config.whole_num_blocks; ++i) {
        const std::int64_t out = static_cast<std::int64_t>(config.whole_base_width) * std::min(8, 1 << i);
        convs_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, out, 3).stride(2).padding(1)));
        ch = out;
    }
    head_ = register_module("head", torch::nn::Linear(ch, 1));
}

torch::Tensor WholeImageDiscriminatorImpl::forward(const torch::Tensor& images) {
    require_shape(images.dim() == 4 && images.size(1) == 3, "whole-image discriminator expects B×3×H×W");
    auto h = dwt2(images);
    for (const auto& m : *convs_) h = torch::leaky_relu(m->as<torch::nn::Conv2dImpl>()->forward(h), 0.2);
    return head_->forward(h.mean({2, 3}));
}

DiscriminatorEnsembleImpl::DiscriminatorEnsembleImpl(const std::vector<std::string>& layer_ids,
                                                     const std::vector<std::int64_t>& channels,
                                                     const DiscriminatorConfig& config)
    : layer_ids_(layer_ids) {
    require_arg(!layer_ids.empty() && layer_ids.size() == channels.size(),
                "ensemble: one channel count per layer id required");
    for (std::size_t i = 0; i < layer_ids.size(); ++i)
        members_.push_back(register_module("d_" + layer_ids[i], FeatureDiscriminator(channels[i], config)));
}

FeatureDiscriminator& DiscriminatorEnsembleImpl::at(const std::string& layer_id) {
    for (std::size_t i = 0; i < layer_ids_.size(); ++i)
        if (layer_ids_[i] == layer_id) return members_[i];
    throw ConfigError("ensemble has no discriminator for layer " + layer_id);
}

torch::Tensor DiscriminatorEnsembleImpl::forward_layer(const std::string& layer_id, const torch::Tensor& features) {
    return at(layer_id)->forward(features);
}

std::vector<torch::Tensor> DiscriminatorEnsembleImpl::forward(const FeaturePyramid& pyramid) {
    std::vector<torch::Tensor> out;
    out.reserve(pyramid.size());
    for (std::size_t i = 0; i < pyramid.size(); ++i) out.push_back(forward_layer(pyramid.layer_ids[i], pyramid[i]));
    return out;
}

bool contains_spectral_norm(const torch::nn::Module& module) {
    for (const auto& m : module.modules(/*include_self=*/true))
        if (dynamic_cast<const SNConv2dImpl*>(m.get())) return true;
    return false;
}

bool all_convs_spectral(const torch::nn::Module& module) {
    bool any = false;
    for (const auto& m : module.modules(/*include_self=*/true)) {
        if (dynamic_cast<const torch::nn::Conv2dImpl*>(m.get())) return false;
        if (dynamic_cast<const SNConv2dImpl*>(m.get())) any = true;
    }
    return any;
}

torch::Tensor r1_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& d, const torch::Tensor& x_real,
                         double gamma) {
    auto x = x_real.detach().requires_grad_(true);
    const auto logits = d(x);
    if (!logits.requires_grad()) return torch::zeros({}, x_real.options());  // input-independent critic
    auto grads = torch::autograd::grad({logits.sum()}, {x}, {}, /*retain_graph=*/true, /*create_graph=*/true,
                                       /*allow_unused=*/true);
    if (!grads[0].defined()) return torch::zeros({}, x_real.options());
    return 0.5 * gamma * grads[0].pow(2).flatten(1).sum(1).mean();
}

}  // namespace s2r

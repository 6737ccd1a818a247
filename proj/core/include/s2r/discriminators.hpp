#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "s2r/backbone.hpp"
#include "s2r/spectral_norm.hpp"

namespace s2r {

struct DiscriminatorConfig {
    // Whole-image (wavelet) discriminator.
    int whole_base_width = 32;
    int whole_num_blocks = 4;
    // Feature-space ensemble.
    int feature_hidden = 64;
    int feature_num_blocks = 5;
    int group_norm_groups = 8;
    int power_iterations = 1;
};

// Per-pixel realism classifier over one backbone layer:
// `num_blocks` × (SN conv 3×3 -> GroupNorm -> ReLU), then SN conv 1×1 to one channel.
class FeatureDiscriminatorImpl : public torch::nn::Module {
public:
    FeatureDiscriminatorImpl(std::int64_t in_channels, const DiscriminatorConfig& config);
    torch::Tensor forward(const torch::Tensor& features);

    std::int64_t in_channels() const { return in_channels_; }
    std::vector<SNConv2d> sn_convs() const;

private:
    std::int64_t in_channels_;
    std::vector<SNConv2d> convs_;
    std::vector<torch::nn::GroupNorm> norms_;
    SNConv2d proj_{nullptr};
};
TORCH_MODULE(FeatureDiscriminator);

// Whole-image discriminator on Haar coefficients: `num_blocks` stride-2 conv +
// LeakyReLU blocks, global average pooling, linear head. One logit per image.
// Deliberately without spectral normalization (regularized by R1 instead).
class WholeImageDiscriminatorImpl : public torch::nn::Module {
public:
    explicit WholeImageDiscriminatorImpl(const DiscriminatorConfig& config);
    torch::Tensor forward(const torch::Tensor& images);

private:
    torch::nn::ModuleList convs_{nullptr};
    torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(WholeImageDiscriminator);

// One FeatureDiscriminator per backbone layer, keyed by layer id.
class DiscriminatorEnsembleImpl : public torch::nn::Module {
public:
    DiscriminatorEnsembleImpl(const std::vector<std::string>& layer_ids, const std::vector<std::int64_t>& channels,
                              const DiscriminatorConfig& config);

    // Logit map per pyramid layer, in pyramid order.
    std::vector<torch::Tensor> forward(const FeaturePyramid& pyramid);
    torch::Tensor forward_layer(const std::string& layer_id, const torch::Tensor& features);

    const std::vector<std::string>& layer_ids() const { return layer_ids_; }
    FeatureDiscriminator& at(const std::string& layer_id);

private:
    std::vector<std::string> layer_ids_;
    std::vector<FeatureDiscriminator> members_;
};
TORCH_MODULE(DiscriminatorEnsemble);

// Structural queries used to assert the regularization split.
bool contains_spectral_norm(const torch::nn::Module& module);
// True when the module has at least one convolution and every convolution is spectrally normalized.
bool all_convs_spectral(const torch::nn::Module& module);

// (gamma / 2) · mean over batch of ||d logit / d x||² evaluated at x_real.
// The returned scalar keeps the graph, so it can be back-propagated into `d`'s parameters.
torch::Tensor r1_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& d, const torch::Tensor& x_real,
                         double gamma);

}  // namespace s2r

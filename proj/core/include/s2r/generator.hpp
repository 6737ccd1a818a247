#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "s2r/dataset.hpp"

namespace s2r {

struct GeneratorConfig {
    int num_classes = 5;
    int base_width = 32;
    int num_upsampling_stages = 4;
    int noise_dim = 16;
    ImageSize output_size{64, 128};

    // Spatial size of the first feature grid: output_size / 2^stages.
    ImageSize initial_grid() const;
    // Throws ConfigError unless output_size is an exact multiple of 2^stages and every field is positive.
    void validate() const;

    static GeneratorConfig toy(int num_classes);
    static GeneratorConfig benchmark(int num_classes);
};

// Spatially-adaptive normalization: parameter-free instance norm modulated by
// per-pixel scale/shift predicted from the conditioning volume.
class SpatialAdaptiveNormImpl : public torch::nn::Module {
public:
    SpatialAdaptiveNormImpl(std::int64_t channels, std::int64_t cond_channels, std::int64_t hidden);
    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& cond);

private:
    torch::nn::InstanceNorm2d norm_{nullptr};
    torch::nn::Conv2d shared_{nullptr}, gamma_{nullptr}, beta_{nullptr};
};
TORCH_MODULE(SpatialAdaptiveNorm);

class SpatialAdaptiveResBlockImpl : public torch::nn::Module {
public:
    SpatialAdaptiveResBlockImpl(std::int64_t in_ch, std::int64_t out_ch, std::int64_t cond_channels);
    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& cond);

private:
    bool learned_shortcut_;
    SpatialAdaptiveNorm norm0_{nullptr}, norm1_{nullptr}, norm_s_{nullptr};
    torch::nn::Conv2d conv0_{nullptr}, conv1_{nullptr}, conv_s_{nullptr};
};
TORCH_MODULE(SpatialAdaptiveResBlock);

// Conditional generator: (one-hot layout, spatial noise) -> image in [-1,1].
//
// The noise volume is concatenated to the layout; the concatenation is the
// conditioning input of every normalization layer. The network is fully
// convolutional and independent across batch items, so any input whose size
// is a multiple of 2^stages is accepted.
class GeneratorImpl : public torch::nn::Module {
public:
    explicit GeneratorImpl(GeneratorConfig config);

    // layout: B×C×H×W one-hot, noise: B×noise_dim×H×W. Returns B×3×H×W.
    torch::Tensor forward(const torch::Tensor& layout, const torch::Tensor& noise);

    const GeneratorConfig& config() const { return config_; }
    std::vector<std::int64_t> stage_channels() const;

private:
    GeneratorConfig config_;
    torch::nn::Conv2d head_{nullptr};
    torch::nn::ModuleList blocks_{nullptr};
    torch::nn::Conv2d out_{nullptr};
};
TORCH_MODULE(Generator);

torch::Tensor generate(Generator& g, const torch::Tensor& layout, const torch::Tensor& noise);

// Apply the generator independently to each patch of a grid_k×grid_k split of
// (layout, noise) and reassemble. grid_k = 1 is generate().
torch::Tensor generate_patchwise(Generator& g, const torch::Tensor& layout, const torch::Tensor& noise, int grid_k);

// Standard-normal noise volume B×noise_dim×H×W from a dedicated generator.
torch::Tensor sample_noise(std::int64_t batch, int noise_dim, ImageSize size, std::uint64_t seed,
                           torch::Dtype dtype = torch::kFloat32);

}  // namespace s2r

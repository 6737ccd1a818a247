#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace s2r {

enum class WeightsSource { PretrainedFile, RandomFixed };

struct BackboneConfig {
    // Convolution widths of the 3×3 conv stack; kPool marks a 2×2 max-pool.
    static constexpr int kPool = 0;
    std::vector<int> arch = vgg16_arch();
    // Activations to expose, named relu<block>_<conv> (1-based), shallow to deep.
    std::vector<std::string> layer_ids{"relu3_3", "relu4_3", "relu5_3"};
    WeightsSource weights_source = WeightsSource::RandomFixed;
    std::string weights_path;  // TorchScript archive, used for PretrainedFile
    std::uint64_t seed = 0;    // used for RandomFixed
    std::array<double, 3> mean{0.485, 0.456, 0.406};
    std::array<double, 3> std{0.229, 0.224, 0.225};

    static std::vector<int> vgg16_arch();
};

// Activations of the configured layers, shallow to deep.
struct FeaturePyramid {
    std::vector<std::string> layer_ids;
    std::vector<torch::Tensor> layers;
    std::int64_t source_batch = 0;

    std::size_t size() const { return layers.size(); }
    const torch::Tensor& operator[](std::size_t i) const { return layers.at(i); }
    const torch::Tensor& at(const std::string& layer_id) const;
};

// Frozen convolutional feature extractor. Parameters never require grad;
// gradients still flow to the input.
class FeatureBackboneImpl : public torch::nn::Module {
public:
    explicit FeatureBackboneImpl(BackboneConfig config);

    // x: B×3×H×W in [-1,1]. Re-normalized internally to the backbone's input statistics.
    FeaturePyramid extract(const torch::Tensor& x) const;
    // extract(patchify(x, grid_k)); every layer's batch axis is B·grid_k².
    FeaturePyramid phi(const torch::Tensor& x, int grid_k) const;

    const BackboneConfig& config() const { return config_; }
    // Smallest spatial side accepted by extract (one pixel at the deepest configured layer).
    std::int64_t min_input_size() const { return min_input_; }
    std::int64_t channels(const std::string& layer_id) const;
    std::vector<std::int64_t> layer_channels() const;

private:
    struct Tap {
        std::string id;
        std::size_t step;  // index into steps_ after which the activation is taken
    };
    struct Step {
        bool pool = false;
        torch::nn::Conv2d conv{nullptr};
    };

    void init_random_fixed();
    void load_pretrained(const std::string& path);

    BackboneConfig config_;
    std::vector<Step> steps_;
    std::vector<Tap> taps_;
    std::vector<std::int64_t> tap_channels_;
    std::int64_t min_input_ = 1;
    torch::Tensor mean_, std_;
};
TORCH_MODULE(FeatureBackbone);

}  // namespace s2r

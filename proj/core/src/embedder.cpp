#include "s2r/embedder.hpp"

#include <cmath>
#include <filesystem>

#include <torch/script.h>

#include "s2r/errors.hpp"
#include "s2r/module_utils.hpp"

namespace s2r {

FeatureSet Embedder::embed(const torch::Tensor& images, std::int64_t batch_size) {
    require_shape(images.dim() == 4 && images.size(1) == 3, "embed: expected N×3×H×W images");
    require_arg(batch_size > 0, "embed: batch size must be positive");
    torch::NoGradGuard guard;
    std::vector<torch::Tensor> parts;
    for (std::int64_t i = 0; i < images.size(0); i += batch_size) {
        const auto n = std::min(batch_size, images.size(0) - i);
        parts.push_back(embed_batch(images.narrow(0, i, n)).to(torch::kFloat64));
    }
    return FeatureSet{parts.empty() ? torch::empty({0, 0}, torch::kFloat64) : torch::cat(parts, 0), id()};
}

RandomConvEmbedder::RandomConvEmbedder(std::uint64_t seed) : seed_(seed) {
    auto gen = make_generator(derive_seed(seed, 0xE3BEDull));
    const std::vector<std::pair<std::int64_t, std::int64_t>> shapes{{3, 32}, {32, 64}, {64, 64}};
    for (const auto& [in, out] : shapes) {
        const double stdev = std::sqrt(2.0 / static_cast<double>(in * 9));
        weights_.push_back(at::normal(0.0, stdev, {out, in, 3, 3}, gen));
        biases_.push_back(at::normal(0.0, 0.1, {out}, gen));
    }
}

std::string RandomConvEmbedder::id() const { return "random_conv:" + std::to_string(seed_); }

torch::Tensor RandomConvEmbedder::embed_batch(const torch::Tensor& images) {
    auto h = images.to(torch::kFloat32);
    for (std::size_t i = 0; i < weights_.size(); ++i)
        h = torch::relu(torch::conv2d(h, weights_[i], biases_[i], /*stride=*/2, /*padding=*/1));
    return h.mean({2, 3}).to(torch::kFloat64);
}

struct TorchScriptEmbedder::Impl {
    torch::jit::script::Module module;
};

TorchScriptEmbedder::TorchScriptEmbedder(const std::string& path) : impl_(std::make_unique<Impl>()), path_(path) {
    try {
        impl_->module = torch::jit::load(path);
    } catch (const c10::Error& e) {
        throw Error("cannot load embedder " + path + ": " + e.what_without_backtrace());
    }
    impl_->module.eval();
}

TorchScriptEmbedder::~TorchScriptEmbedder() = default;

std::string TorchScriptEmbedder::id() const {
    return "torchscript:" + std::filesystem::path(path_).filename().string();
}

torch::Tensor TorchScriptEmbedder::embed_batch(const torch::Tensor& images) {
    auto out = impl_->module.forward({images.to(torch::kFloat32)}).toTensor();
    return out.reshape({out.size(0), -1}).to(torch::kFloat64);
}

std::unique_ptr<Embedder> make_embedder(const std::string& kind, const std::string& path, std::uint64_t seed) {
    if (kind == "random_conv") return std::make_unique<RandomConvEmbedder>(seed);
    if (kind == "torchscript") {
        if (path.empty()) throw ConfigError("metrics.embedder_path is required for a torchscript embedder");
        return std::make_unique<TorchScriptEmbedder>(path);
    }
    throw ConfigError("unknown embedder kind '" + kind + "'");
}

}  // namespace s2r

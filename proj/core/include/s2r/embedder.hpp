#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <torch/torch.h>

#include "s2r/metrics.hpp"

namespace s2r {

// Image set -> feature set, for FID/KID.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    // images: B×3×H×W in [-1,1]; returns B×D float64.
    virtual torch::Tensor embed_batch(const torch::Tensor& images) = 0;

    FeatureSet embed(const torch::Tensor& images, std::int64_t batch_size = 16);
};

// Fixed, seeded random conv net (3 stride-2 conv+ReLU layers, global average pool, D = 64).
class RandomConvEmbedder final : public Embedder {
public:
    explicit RandomConvEmbedder(std::uint64_t seed);
    std::string id() const override;
    torch::Tensor embed_batch(const torch::Tensor& images) override;

private:
    std::uint64_t seed_;
    std::vector<torch::Tensor> weights_;
    std::vector<torch::Tensor> biases_;
};

// Any TorchScript module mapping B×3×H×W images in [-1,1] to B×D features
// (e.g. an exported Inception pool3 network with its own preprocessing).
class TorchScriptEmbedder final : public Embedder {
public:
    explicit TorchScriptEmbedder(const std::string& path);
    ~TorchScriptEmbedder() override;
    std::string id() const override;
    torch::Tensor embed_batch(const torch::Tensor& images) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string path_;
};

std::unique_ptr<Embedder> make_embedder(const std::string& kind, const std::string& path, std::uint64_t seed);

}  // namespace s2r

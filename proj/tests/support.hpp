#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <torch/torch.h>

#include "s2r/backbone.hpp"
#include "s2r/discriminators.hpp"
#include "s2r/run_config.hpp"

namespace s2r::fixtures {

// Seeded source of random shapes and tensors for property tests.
class Rand {
public:
    explicit Rand(std::uint64_t seed) : rng_(seed), gen_(at::make_generator<at::CPUGeneratorImpl>(seed)) {}

    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
    }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
    }

    torch::Tensor normal(torch::IntArrayRef shape, torch::Dtype dtype = torch::kFloat32) {
        return at::normal(0.0, 1.0, shape, gen_).to(dtype);
    }
    torch::Tensor ids(torch::IntArrayRef shape, std::int64_t num_classes) {
        return at::randint(0, num_classes, shape, gen_, torch::kLong);
    }
    at::Generator& generator() { return gen_; }

private:
    std::mt19937_64 rng_;
    at::Generator gen_;
};

// Central finite-difference gradient of a scalar function of x (64-bit).
inline torch::Tensor numeric_gradient(const std::function<double(const torch::Tensor&)>& f, const torch::Tensor& x,
                                      double eps = 1e-6) {
    auto grad = torch::zeros_like(x);
    auto flat = x.clone();
    auto fview = flat.view({-1});
    auto gview = grad.view({-1});
    for (std::int64_t i = 0; i < fview.numel(); ++i) {
        const double orig = fview[i].item<double>();
        fview[i] = orig + eps;
        const double up = f(flat);
        fview[i] = orig - eps;
        const double down = f(flat);
        fview[i] = orig;
        gview[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

inline double relative_error(const torch::Tensor& a, const torch::Tensor& b) {
    const double denom = std::max(b.norm().item<double>(), 1e-12);
    return (a - b).norm().item<double>() / denom;
}

// Three conv layers with a pool in between; layers relu1_2 and relu2_1.
inline BackboneConfig tiny_backbone_config(std::uint64_t seed = 0) {
    BackboneConfig c;
    c.arch = {4, 6, BackboneConfig::kPool, 8};
    c.layer_ids = {"relu1_2", "relu2_1"};
    c.seed = seed;
    return c;
}

inline DiscriminatorConfig tiny_discriminator_config() {
    DiscriminatorConfig c;
    c.whole_base_width = 4;
    c.whole_num_blocks = 2;
    c.feature_hidden = 8;
    c.feature_num_blocks = 2;
    c.group_norm_groups = 2;
    return c;
}

// Toy run shrunk for unit tests: 32×64 images, tiny datasets.
inline RunConfig small_toy_config() {
    auto c = RunConfig::toy();
    c.data.size = {32, 64};
    c.data.toy_synthetic = 24;
    c.data.toy_real = 12;
    c.data.test_count = 8;
    c.generator.output_size = {32, 64};
    c.generator.base_width = 16;
    c.generator.num_upsampling_stages = 3;
    c.discriminator.whole_base_width = 8;
    c.discriminator.feature_hidden = 16;
    c.train.max_steps = 10;
    c.train.checkpoint_interval = 0;
    c.metrics.kid_subsets = 10;
    c.metrics.batch_size = 8;
    return c;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    auto p = std::filesystem::temp_directory_path() / ("s2r_test_" + tag + "_" + std::to_string(stamp));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace s2r::fixtures
